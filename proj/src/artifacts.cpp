#include "glrom/artifacts.hpp"

#include <algorithm>
#include <bit>

#include "glrom/config.hpp"

namespace glrom {

namespace {

static_assert(std::endian::native == std::endian::little, "artifacts assume little endian");

constexpr char kMagic[8] = {'G', 'L', 'R', 'O', 'M', '0', '0', '1'};

}  // namespace

BinaryWriter::BinaryWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary) {
  if (!out_) {
    throw InvalidArgument("cannot write " + path.string());
  }
  raw(kMagic, sizeof(kMagic));
}

void BinaryWriter::raw(const void* data, std::size_t bytes) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out_) {
    throw Error("write failed: " + path_.string());
  }
}

void BinaryWriter::write(std::int64_t v) { raw(&v, sizeof(v)); }
void BinaryWriter::write(double v) { raw(&v, sizeof(v)); }

void BinaryWriter::write(const std::string& s) {
  write(static_cast<std::int64_t>(s.size()));
  raw(s.data(), s.size());
}

void BinaryWriter::write(const std::vector<int>& v) {
  write(static_cast<std::int64_t>(v.size()));
  for (int x : v) {
    write(static_cast<std::int64_t>(x));
  }
}

void BinaryWriter::write(const std::vector<Index>& v) {
  write(static_cast<std::int64_t>(v.size()));
  for (Index x : v) {
    write(static_cast<std::int64_t>(x));
  }
}

void BinaryWriter::write(const std::vector<double>& v) {
  write(static_cast<std::int64_t>(v.size()));
  raw(v.data(), v.size() * sizeof(double));
}

void BinaryWriter::write(const Vec& v) {
  write(static_cast<std::int64_t>(v.size()));
  raw(v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
}

void BinaryWriter::write(const Mat& m) {
  write(static_cast<std::int64_t>(m.rows()));
  write(static_cast<std::int64_t>(m.cols()));
  raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
}

void BinaryWriter::write(const SpMat& m) {
  write(static_cast<std::int64_t>(m.rows()));
  write(static_cast<std::int64_t>(m.cols()));
  write(static_cast<std::int64_t>(m.nonZeros()));
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      write(static_cast<std::int64_t>(it.row()));
      write(static_cast<std::int64_t>(it.col()));
      write(it.value());
    }
  }
}

void BinaryWriter::write(const PodBasis& p) {
  write(p.modes);
  write(p.eigenvalues);
  write(p.all_eigenvalues);
  write(static_cast<std::int64_t>(p.numerical_rank));
}

void BinaryWriter::write(const DeimModel& d) {
  write(d.basis);
  write(d.indices);
  write(d.projector);
  write(d.condition_number);
}

void BinaryWriter::write(const MultiscaleSpace& s) {
  write(s.basis);
  write(s.column_region);
  write(s.column_rank);
  write(static_cast<std::int64_t>(s.eigenvalues.size()));
  for (const Vec& e : s.eigenvalues) {
    write(e);
  }
  write(s.offline_count);
}

void BinaryWriter::write(const LocalDeimSet& l) {
  write(static_cast<std::int64_t>(l.points_per_region));
  write(static_cast<std::int64_t>(l.regions.size()));
  for (const RegionDeim& r : l.regions) {
    write(static_cast<std::int64_t>(r.region));
    write(r.dofs);
    write(r.model);
    write(r.sample_dofs);
    write(r.owned_dofs);
    write(r.owned_projector);
  }
}

void BinaryWriter::close() {
  out_.close();
  if (!out_) {
    throw Error("write failed: " + path_.string());
  }
}

BinaryReader::BinaryReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) {
    throw InvalidArgument("cannot read " + path.string());
  }
  char magic[sizeof(kMagic)];
  raw(magic, sizeof(magic));
  if (!std::equal(magic, magic + sizeof(magic), kMagic)) {
    throw InvalidArgument(path.string() + " is not a glrom artifact");
  }
}

void BinaryReader::raw(void* data, std::size_t bytes) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (!in_) {
    throw InvalidArgument("truncated artifact: " + path_.string());
  }
}

std::int64_t BinaryReader::read_int() {
  std::int64_t v = 0;
  raw(&v, sizeof(v));
  return v;
}

double BinaryReader::read_double() {
  double v = 0.0;
  raw(&v, sizeof(v));
  return v;
}

std::int64_t BinaryReader::read_count() {
  const std::int64_t n = read_int();
  if (n < 0 || n > (std::int64_t{1} << 40)) {
    throw InvalidArgument("corrupt artifact: " + path_.string());
  }
  return n;
}

std::string BinaryReader::read_string() {
  std::string s(static_cast<std::size_t>(read_count()), '\0');
  raw(s.data(), s.size());
  return s;
}

std::vector<int> BinaryReader::read_ints() {
  std::vector<int> v(static_cast<std::size_t>(read_count()));
  for (int& x : v) {
    x = static_cast<int>(read_int());
  }
  return v;
}

std::vector<Index> BinaryReader::read_indices() {
  std::vector<Index> v(static_cast<std::size_t>(read_count()));
  for (Index& x : v) {
    x = static_cast<Index>(read_int());
  }
  return v;
}

std::vector<double> BinaryReader::read_doubles() {
  std::vector<double> v(static_cast<std::size_t>(read_count()));
  raw(v.data(), v.size() * sizeof(double));
  return v;
}

Vec BinaryReader::read_vec() {
  Vec v(read_count());
  raw(v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
  return v;
}

Mat BinaryReader::read_mat() {
  const Index rows = read_count();
  const Index cols = read_count();
  Mat m(rows, cols);
  raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  return m;
}

SpMat BinaryReader::read_sparse() {
  const Index rows = read_count();
  const Index cols = read_count();
  const Index nnz = read_count();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (Index k = 0; k < nnz; ++k) {
    const Index r = read_int();
    const Index c = read_int();
    const double v = read_double();
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw InvalidArgument("corrupt sparse matrix in " + path_.string());
    }
    triplets.emplace_back(r, c, v);
  }
  SpMat m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

PodBasis BinaryReader::read_pod() {
  PodBasis p;
  p.modes = read_mat();
  p.eigenvalues = read_vec();
  p.all_eigenvalues = read_vec();
  p.numerical_rank = read_int();
  return p;
}

DeimModel BinaryReader::read_deim() {
  DeimModel d;
  d.basis = read_mat();
  d.indices = read_indices();
  d.projector = read_mat();
  d.condition_number = read_double();
  return d;
}

MultiscaleSpace BinaryReader::read_space() {
  MultiscaleSpace s;
  s.basis = read_sparse();
  s.column_region = read_ints();
  s.column_rank = read_ints();
  s.eigenvalues.resize(static_cast<std::size_t>(read_count()));
  for (Vec& e : s.eigenvalues) {
    e = read_vec();
  }
  s.offline_count = read_ints();
  return s;
}

LocalDeimSet BinaryReader::read_local_deim() {
  LocalDeimSet l;
  l.points_per_region = static_cast<int>(read_int());
  l.regions.resize(static_cast<std::size_t>(read_count()));
  for (RegionDeim& r : l.regions) {
    r.region = static_cast<int>(read_int());
    r.dofs = read_ints();
    r.model = read_deim();
    r.sample_dofs = read_ints();
    r.owned_dofs = read_ints();
    r.owned_projector = read_mat();
  }
  return l;
}

void save_offline(const std::filesystem::path& dir, const ExperimentSpec& spec,
                  const OfflineData& data) {
  if (!data.space || !data.local_deim) {
    throw InvalidArgument("save_offline: offline data is incomplete");
  }
  std::filesystem::create_directories(dir);
  {
    std::ofstream cfg(dir / "config.txt");
    if (!cfg) {
      throw InvalidArgument("cannot write " + (dir / "config.txt").string());
    }
    cfg << format_config(spec);
  }
  BinaryWriter w(dir / "offline.bin");
  w.write(data.mu_offline);
  w.write(static_cast<std::int64_t>(data.local_points));
  w.write(data.seconds);
  w.write(*data.space);
  w.write(*data.local_deim);
  w.write(data.snapshots);
  w.write(data.f_snapshots);
  w.close();
}

OfflineArtifacts load_offline(const std::filesystem::path& dir) {
  OfflineArtifacts out;
  out.spec = load_config(dir / "config.txt");
  BinaryReader r(dir / "offline.bin");
  OfflineData& d = out.data;
  d.mu_offline = r.read_doubles();
  d.local_points = static_cast<int>(r.read_int());
  d.seconds = r.read_double();
  d.space = std::make_shared<const MultiscaleSpace>(r.read_space());
  d.local_deim = std::make_shared<const LocalDeimSet>(r.read_local_deim());
  d.snapshots = r.read_mat();
  d.f_snapshots = r.read_mat();
  if (d.snapshots.rows() != d.space->coarse_size() ||
      d.f_snapshots.rows() != d.space->fine_size() ||
      d.snapshots.cols() != d.f_snapshots.cols()) {
    throw InvalidArgument("artifact dimensions are inconsistent in " + dir.string());
  }
  return out;
}

}  // namespace glrom
