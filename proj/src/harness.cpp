#include "glrom/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

namespace glrom {

double energy_error(const Vec& reference, const Vec& approximation, const SpMat& stiffness) {
  if (reference.size() != approximation.size() || stiffness.rows() != reference.size()) {
    throw InvalidArgument("energy_error: dimension mismatch");
  }
  const double ref = reference.dot(stiffness * reference);
  if (!(ref > 0.0)) {
    throw InvalidArgument("energy_error: reference has zero energy norm");
  }
  const Vec diff = reference - approximation;
  return std::sqrt(std::max(diff.dot(stiffness * diff), 0.0) / ref);
}

double timing_ratio(double t_gl, double t_fine) {
  if (!(t_fine > 0.0)) {
    throw InvalidArgument("timing_ratio: T_fine must be positive");
  }
  return t_gl / t_fine * 100.0;
}

void ExperimentSpec::validate() const {
  if (fine_cells < 1 || coarse_cells < 1 || fine_cells % coarse_cells != 0) {
    throw InvalidArgument("experiment: coarse cells must divide fine cells");
  }
  if (mu_offline.empty()) {
    throw InvalidArgument("experiment: no offline mu values");
  }
  if (offline_modes < 1 || pod_modes < 1 || local_points < 1 || global_points < 1 ||
      random_draws < 1) {
    throw InvalidArgument("experiment: all counts must be >= 1");
  }
  time.validate();
}

ExperimentSpec example_spec(int example) {
  ExperimentSpec s;
  s.example = example;
  switch (example) {
    case 1:
    case 2:
      break;
    case 3:
      s.nonlinearity = Nonlinearity::exp_mu_shifted(0.9);
      s.mu_offline = {2.0, 5.0};
      s.mu_online = 3.0;
      s.source_online = Source::sin4pi();
      s.u0_online = InitialCondition::zero();
      s.local_points = 3;
      s.global_points = 3;
      break;
    case 4:
      s.mu_offline = {10.0, 40.0};
      s.mu_online = 24.0;
      s.u0_online = InitialCondition::zero();
      s.local_points = 3;
      s.global_points = 3;
      break;
    case 5:
      s.mu_offline = {10.0, 25.0, 39.0};
      s.mu_online = 25.0;
      s.local_points = 3;
      s.global_points = 3;
      break;
    default:
      throw InvalidArgument("example id must be 1..5");
  }
  return s;
}

namespace {

std::string mu_key(const std::vector<double>& mus) {
  std::ostringstream ss;
  ss.precision(17);
  for (double m : mus) {
    ss << m << ';';
  }
  return ss.str();
}

std::string join(const std::vector<double>& values, char sep) {
  std::ostringstream ss;
  for (size_t k = 0; k < values.size(); ++k) {
    if (k) {
      ss << sep;
    }
    ss << values[k];
  }
  return ss.str();
}

PermeabilityField make_permeability(const ExperimentSpec& spec, const FineMesh& mesh) {
  if (!spec.permeability_csv.empty()) {
    return load_permeability_csv(spec.permeability_csv, mesh);
  }
  ChannelLayout layout = ChannelLayout::standard();
  layout.rotated = spec.rotated;
  return channel_permeability(mesh, spec.eta, layout);
}

}  // namespace

Pipeline::Pipeline(ExperimentSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  FineMesh mesh = build_fine_mesh(spec_.fine_cells, spec_.fine_cells);
  grid_ = build_coarse_grid(mesh, spec_.coarse_cells, spec_.coarse_cells);
  PermeabilityField kappa = make_permeability(spec_, mesh);
  fine_ = std::make_unique<FineModel>(std::move(mesh), std::move(kappa), spec_.nonlinearity);
}

std::shared_ptr<const MultiscaleSpace> Pipeline::space() {
  if (!space_) {
    const Vec u0 = fine_->initial_state(spec_.u0_offline, spec_.source_offline);
    GmsfemOptions options;
    options.offline_modes = spec_.offline_modes;
    space_ = std::make_shared<const MultiscaleSpace>(
        build_multiscale_space(fine_->mesh(), grid_, fine_->dofs(), fine_->permeability(),
                               spec_.nonlinearity, spec_.mu_offline, fine_->dofs().extend(u0),
                               options));
    spdlog::info("multiscale space: {} fine dofs, {} coarse dofs", space_->fine_size(),
                 space_->coarse_size());
  }
  return space_;
}

const Trajectory& Pipeline::offline_fom(double mu) {
  auto it = offline_fom_.find(mu);
  if (it == offline_fom_.end()) {
    const Vec u0 = fine_->initial_state(spec_.u0_offline, spec_.source_offline);
    Trajectory traj = solve_fom(*fine_, mu, fine_->load(spec_.source_offline), u0, spec_.time);
    spdlog::info("offline FOM mu={} took {:.2f}s", mu, traj.wall_seconds);
    it = offline_fom_.emplace(mu, std::move(traj)).first;
  }
  return it->second;
}

const Trajectory& Pipeline::reference(double mu, const Source& h, const InitialCondition& u0) {
  std::ostringstream key;
  key.precision(17);
  key << mu << '|' << int(h.kind) << ':' << h.constant << '|' << int(u0.kind) << ':' << u0.scale;
  auto it = reference_.find(key.str());
  if (it == reference_.end() || u0.kind == InitialCondition::Kind::Explicit) {
    Trajectory traj = solve_fom(*fine_, mu, fine_->load(h), fine_->initial_state(u0, h), spec_.time);
    spdlog::info("reference FOM mu={} took {:.2f}s", mu, traj.wall_seconds);
    it = reference_.insert_or_assign(key.str(), std::move(traj)).first;
  }
  return it->second;
}

OfflineData Pipeline::offline(const std::vector<double>& mu_offline, int local_points) {
  const std::string key = mu_key(mu_offline) + "L" + std::to_string(local_points);
  if (auto it = offline_.find(key); it != offline_.end()) {
    return it->second;
  }
  const auto start = std::chrono::steady_clock::now();
  OfflineData data;
  data.mu_offline = mu_offline;
  data.local_points = local_points;
  data.space = space();

  std::vector<TrainingRun> runs;
  for (double mu : mu_offline) {
    runs.push_back({mu, offline_fom(mu).as_matrix()});
  }
  data.local_deim = std::make_shared<const LocalDeimSet>(train_local_deim(
      runs, fine_->mesh(), grid_, fine_->dofs(), spec_.nonlinearity, local_points));

  const CoarseModel coarse(*fine_, data.space->basis, *data.local_deim);
  const Vec load = fine_->load(spec_.source_offline);
  const Vec u0 = fine_->initial_state(spec_.u0_offline, spec_.source_offline);
  std::vector<Mat> z_parts, f_parts;
  Index z_cols = 0;
  for (double mu : mu_offline) {
    CoarseSolution sol = solve_coarse(coarse, mu, load, u0, spec_.time);
    z_cols += sol.snapshots.cols();
    z_parts.push_back(std::move(sol.snapshots));
    f_parts.push_back(std::move(sol.f_snapshots));
  }
  data.snapshots.resize(coarse.size(), z_cols);
  data.f_snapshots.resize(fine_->size(), z_cols);
  Index col = 0;
  for (size_t k = 0; k < z_parts.size(); ++k) {
    data.snapshots.middleCols(col, z_parts[k].cols()) = z_parts[k];
    data.f_snapshots.middleCols(col, f_parts[k].cols()) = f_parts[k];
    col += z_parts[k].cols();
  }
  data.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  spdlog::info("offline stage mu=[{}] L_local={} took {:.2f}s", join(mu_offline, ' '),
               local_points, data.seconds);
  offline_.emplace(key, data);
  return data;
}

RomSystem Pipeline::build(const OfflineData& offline, int pod_modes, int global_points) const {
  return build_rom(offline.snapshots, offline.f_snapshots, pod_modes, global_points,
                   offline.space->basis, *fine_);
}

OnlineResult Pipeline::online(const OfflineData& offline, int pod_modes, int global_points,
                              double mu, const Source& h, const InitialCondition& u0) {
  const Trajectory& ref = reference(mu, h, u0);
  const RomSystem rom = build(offline, pod_modes, global_points);

  OnlineResult out;
  const Vec alpha0 = rom_project(rom, *fine_, fine_->initial_state(u0, h));
  const Vec load = rom_load(rom, fine_->load(h));
  const Trajectory reduced = solve_rom(rom, mu, load, alpha0, spec_.time, &out.stats);
  out.t_fine = ref.wall_seconds;
  out.t_gl = reduced.wall_seconds;
  out.ratio = timing_ratio(out.t_gl, out.t_fine);

  const size_t steps = std::min(ref.states.size(), reduced.states.size());
  for (size_t n = 1; n < steps; ++n) {
    const SpMat energy = fine_->frozen_stiffness(ref.states[n], mu);
    out.times.push_back(ref.times[n]);
    out.errors.push_back(energy_error(ref.states[n], downscale(rom, reduced.states[n]), energy));
  }
  out.steady_error = out.errors.empty() ? 0.0 : out.errors.back();
  out.final_state = downscale(rom, reduced.final_state());
  return out;
}

ResultRow run_configuration(Pipeline& pipeline, const std::string& sweep,
                            const std::vector<double>& mu_offline, int pod_modes,
                            int local_points, int global_points, double mu_online,
                            const Source& h_online, const InitialCondition& u0_online) {
  ResultRow row;
  row.example = pipeline.spec().example;
  row.sweep = sweep;
  row.mu_offline = mu_offline;
  row.mu_online = mu_online;
  row.pod_modes = pod_modes;
  row.local_points = local_points;
  row.global_points = global_points;
  try {
    const OfflineData offline = pipeline.offline(mu_offline, local_points);
    OnlineResult r =
        pipeline.online(offline, pod_modes, global_points, mu_online, h_online, u0_online);
    row.times = std::move(r.times);
    row.errors = std::move(r.errors);
    row.steady_error = r.steady_error;
    row.t_fine = r.t_fine;
    row.t_gl = r.t_gl;
    row.ratio = r.ratio;
    if (r.stats.newton_iterations > 0) {
      row.mean_newton_gathers =
          static_cast<double>(r.stats.row_gathers) / static_cast<double>(r.stats.newton_iterations);
    }
  } catch (const Error& e) {
    const auto [lo, hi] = std::minmax_element(mu_offline.begin(), mu_offline.end());
    const bool outside = mu_online < *lo || mu_online > *hi;
    row.status = std::string("failed: ") + e.what() +
                 (outside ? " [online mu outside offline range]" : " [online mu inside offline range]");
    spdlog::error("example {} {}: {}", row.example, sweep, row.status);
  }
  spdlog::info("example {} {} N_r={} L=({},{}) error={:.4f} R={:.3f}%", row.example, sweep,
               pod_modes, local_points, global_points, row.steady_error, row.ratio);
  return row;
}

std::vector<ResultRow> run_example(Pipeline& p) {
  const ExperimentSpec& s = p.spec();
  const int n_mu = static_cast<int>(s.mu_offline.size());
  std::vector<ResultRow> rows;
  auto run = [&](const std::string& sweep, const std::vector<double>& mus, int modes, int local,
                 int global) {
    rows.push_back(run_configuration(p, sweep, mus, modes, local, global, s.mu_online,
                                     s.source_online, s.u0_online));
  };
  auto point_sweeps = [&](int modes) {
    for (int g = 1; g <= 3; ++g) run("global_points", s.mu_offline, modes, 1, g);
    for (int l = 1; l <= 3; ++l) run("local_points", s.mu_offline, modes, l, 3);
    for (int k = 1; k <= 3; ++k) run("joint_points", s.mu_offline, modes, k, k);
  };

  switch (s.example) {
    case 1:
      for (int m : {2, 3, 4, 5}) run("pod_modes", s.mu_offline, m, s.local_points, s.global_points);
      for (auto [l, g] : {std::pair{2, 2}, {2, 3}, {3, 3}}) run("deim_timing", s.mu_offline, s.pod_modes, l, g);
      for (int m : {2, 3, 4, 5}) run("pod_timing", s.mu_offline, m, 2, 3);
      break;
    case 2:
      point_sweeps(s.pod_modes);
      break;
    case 3:
      for (double mu : s.mu_offline) {
        run("single_offline_mu", {mu}, s.pod_modes, s.local_points, s.global_points);
      }
      run("combined_offline_mu", s.mu_offline, s.pod_modes * n_mu, s.local_points, s.global_points);
      break;
    case 4:
      point_sweeps(s.pod_modes * n_mu);
      break;
    case 5: {
      std::mt19937_64 rng(s.seed);
      std::normal_distribution<double> dist(s.random_mean, s.random_std);
      double sum = 0.0;
      int ok = 0;
      for (int k = 0; k < s.random_draws; ++k) {
        const double mu = dist(rng);
        rows.push_back(run_configuration(p, "random_mu", s.mu_offline, s.pod_modes * n_mu,
                                         s.local_points, s.global_points, mu, s.source_online,
                                         s.u0_online));
        if (rows.back().ok()) {
          sum += rows.back().steady_error;
          ++ok;
        }
      }
      ResultRow mean;
      mean.example = 5;
      mean.sweep = "random_mu_mean";
      mean.mu_offline = s.mu_offline;
      mean.mu_online = s.random_mean;
      mean.pod_modes = s.pod_modes * n_mu;
      mean.local_points = s.local_points;
      mean.global_points = s.global_points;
      mean.steady_error = ok > 0 ? sum / ok : std::nan("");
      if (ok < s.random_draws) {
        mean.status = "failed: " + std::to_string(s.random_draws - ok) + " draws failed";
      }
      rows.push_back(mean);
      break;
    }
    default:
      throw InvalidArgument("example id must be 1..5");
  }
  return rows;
}

std::vector<ResultRow> run_example(const ExperimentSpec& spec) {
  Pipeline pipeline(spec);
  return run_example(pipeline);
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw InvalidArgument("cannot write " + path.string());
  }
  out.precision(10);
  out << "example,sweep,mu_offline,mu_online,pod_modes,local_points,global_points,"
         "steady_error,max_error,t_fine,t_gl,r_percent,gathers_per_iteration,status\n";
  for (const ResultRow& r : rows) {
    const double max_error =
        r.errors.empty() ? r.steady_error : *std::max_element(r.errors.begin(), r.errors.end());
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    out << r.example << ',' << r.sweep << ',' << join(r.mu_offline, ' ') << ',' << r.mu_online
        << ',' << r.pod_modes << ',' << r.local_points << ',' << r.global_points << ','
        << r.steady_error << ',' << max_error << ',' << r.t_fine << ',' << r.t_gl << ','
        << r.ratio << ',' << r.mean_newton_gathers << ',' << status << '\n';
  }
}

void write_error_series_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw InvalidArgument("cannot write " + path.string());
  }
  out.precision(10);
  out << "example,sweep,row,mu_online,pod_modes,local_points,global_points,time,error\n";
  for (size_t k = 0; k < rows.size(); ++k) {
    const ResultRow& r = rows[k];
    for (size_t n = 0; n < r.errors.size(); ++n) {
      out << r.example << ',' << r.sweep << ',' << k << ',' << r.mu_online << ',' << r.pod_modes
          << ',' << r.local_points << ',' << r.global_points << ',' << r.times[n] << ','
          << r.errors[n] << '\n';
    }
  }
}

}  // namespace glrom
