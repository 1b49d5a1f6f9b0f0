#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "glrom/coarse.hpp"
#include "glrom/gmsfem.hpp"
#include "glrom/harness.hpp"
#include "glrom/reduction.hpp"

namespace glrom {

/// Little-endian flat binary records: integers as int64, reals as float64,
/// matrices as (rows, cols, column-major values), sparse matrices as
/// (rows, cols, nnz, triplets).
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path);

  void write(std::int64_t v);
  void write(double v);
  void write(const std::string& s);
  void write(const std::vector<int>& v);
  void write(const std::vector<Index>& v);
  void write(const std::vector<double>& v);
  void write(const Vec& v);
  void write(const Mat& m);
  void write(const SpMat& m);
  void write(const PodBasis& p);
  void write(const DeimModel& d);
  void write(const MultiscaleSpace& s);
  void write(const LocalDeimSet& l);
  void close();

 private:
  void raw(const void* data, std::size_t bytes);
  std::filesystem::path path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path);

  std::int64_t read_int();
  double read_double();
  std::string read_string();
  std::vector<int> read_ints();
  std::vector<Index> read_indices();
  std::vector<double> read_doubles();
  Vec read_vec();
  Mat read_mat();
  SpMat read_sparse();
  PodBasis read_pod();
  DeimModel read_deim();
  MultiscaleSpace read_space();
  LocalDeimSet read_local_deim();

 private:
  void raw(void* data, std::size_t bytes);
  std::int64_t read_count();
  std::filesystem::path path_;
  std::ifstream in_;
};

/// Offline artifact directory:
///   config.txt   the experiment configuration (parse_config format)
///   offline.bin  mu list, local point count, Phi with its eigen-data,
///                local DEIM set, Z and the N(Phi z) snapshots
void save_offline(const std::filesystem::path& dir, const ExperimentSpec& spec,
                  const OfflineData& data);

struct OfflineArtifacts {
  ExperimentSpec spec;
  OfflineData data;
};

OfflineArtifacts load_offline(const std::filesystem::path& dir);

}  // namespace glrom
