#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "glrom/coarse.hpp"
#include "glrom/fom.hpp"
#include "glrom/gmsfem.hpp"
#include "glrom/grid.hpp"
#include "glrom/model.hpp"
#include "glrom/rom.hpp"

namespace glrom {

/// Relative energy error sqrt((U - U~)^T A (U - U~) / U^T A U).
double energy_error(const Vec& reference, const Vec& approximation, const SpMat& stiffness);

/// R = T_GL / T_fine * 100.
double timing_ratio(double t_gl, double t_fine);

struct ExperimentSpec {
  int example = 1;
  int fine_cells = 100;
  int coarse_cells = 10;
  double eta = 1e6;
  bool rotated = false;
  std::string permeability_csv;  // overrides the channel layout when set

  Nonlinearity nonlinearity = Nonlinearity::exp_mu_u();

  std::vector<double> mu_offline{10.0};
  Source source_offline = Source::sin2pi();
  InitialCondition u0_offline = InitialCondition::scaled_w0(1.0);

  double mu_online = 40.0;
  Source source_online = Source::sin2pi();
  InitialCondition u0_online = InitialCondition::scaled_w0(0.5);

  int offline_modes = 3;
  int pod_modes = 2;
  int local_points = 3;
  int global_points = 5;
  TimeSteppingConfig time;

  std::uint64_t seed = 20141;
  int random_draws = 20;
  double random_mean = 25.0;
  double random_std = 2.0;  // "variance 4" read as variance

  void validate() const;
};

/// Defaults reproducing numerical Examples 1 to 5.
ExperimentSpec example_spec(int example);

struct OfflineData {
  std::vector<double> mu_offline;
  int local_points = 0;
  std::shared_ptr<const MultiscaleSpace> space;
  std::shared_ptr<const LocalDeimSet> local_deim;
  Mat snapshots;    // Z, runs concatenated
  Mat f_snapshots;  // F(Phi z), runs concatenated
  double seconds = 0.0;
};

struct OnlineResult {
  std::vector<double> times;
  std::vector<double> errors;  // energy error per stored step
  double steady_error = 0.0;   // last step
  double t_fine = 0.0;
  double t_gl = 0.0;
  double ratio = 0.0;
  RomStats stats;
  Vec final_state;  // downscaled, interior dofs
};

/// Owns the fine model and caches the expensive intermediate solves.
class Pipeline {
 public:
  explicit Pipeline(ExperimentSpec spec);

  const ExperimentSpec& spec() const { return spec_; }
  const FineModel& fine() const { return *fine_; }
  const CoarseGrid& grid() const { return grid_; }

  /// GMsFEM space built from U0^off of the first offline run.
  std::shared_ptr<const MultiscaleSpace> space();

  /// FOM trajectory at an offline mu with the offline source and U0.
  const Trajectory& offline_fom(double mu);

  /// FOM trajectory for online data (cached by mu, source, U0).
  const Trajectory& reference(double mu, const Source& h, const InitialCondition& u0);

  /// Local DEIM training on offline FOM runs, then coarse solves per mu.
  OfflineData offline(const std::vector<double>& mu_offline, int local_points);

  OnlineResult online(const OfflineData& offline, int pod_modes, int global_points, double mu,
                      const Source& h, const InitialCondition& u0);

  RomSystem build(const OfflineData& offline, int pod_modes, int global_points) const;

 private:
  ExperimentSpec spec_;
  std::unique_ptr<FineModel> fine_;
  CoarseGrid grid_;
  std::shared_ptr<const MultiscaleSpace> space_;
  std::map<double, Trajectory> offline_fom_;
  std::map<std::string, Trajectory> reference_;
  std::map<std::string, OfflineData> offline_;
};

struct ResultRow {
  int example = 0;
  std::string sweep;  // which study the row belongs to
  std::vector<double> mu_offline;
  double mu_online = 0.0;
  int pod_modes = 0;
  int local_points = 0;
  int global_points = 0;
  std::vector<double> times;
  std::vector<double> errors;
  double steady_error = 0.0;
  double t_fine = 0.0;
  double t_gl = 0.0;
  double ratio = 0.0;
  double mean_newton_gathers = 0.0;  // row gathers per Newton iteration
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// Runs the studies of one example. Failing rows are recorded, not thrown.
std::vector<ResultRow> run_example(const ExperimentSpec& spec);
std::vector<ResultRow> run_example(Pipeline& pipeline);

/// Single configuration: offline with the spec's mu list, online at mu_online.
ResultRow run_configuration(Pipeline& pipeline, const std::string& sweep,
                            const std::vector<double>& mu_offline, int pod_modes,
                            int local_points, int global_points, double mu_online,
                            const Source& h_online, const InitialCondition& u0_online);

void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
void write_error_series_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

}  // namespace glrom
