#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

#include "glrom/artifacts.hpp"
#include "glrom/config.hpp"
#include "glrom/harness.hpp"

using namespace glrom;

namespace {

constexpr int kOk = 0;
constexpr int kFatal = 1;
constexpr int kPartial = 2;

void require_same_geometry(const ExperimentSpec& online, const ExperimentSpec& offline) {
  if (online.fine_cells != offline.fine_cells || online.coarse_cells != offline.coarse_cells ||
      online.eta != offline.eta || online.rotated != offline.rotated ||
      online.permeability_csv != offline.permeability_csv ||
      online.nonlinearity.kind != offline.nonlinearity.kind ||
      online.nonlinearity.shift != offline.nonlinearity.shift) {
    throw InvalidArgument(
        "online config disagrees with the artifacts on mesh, permeability or nonlinearity");
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& reduced,
                          const std::vector<double>& errors) {
  std::ofstream out(path);
  if (!out) {
    throw InvalidArgument("cannot write " + path.string());
  }
  out.precision(12);
  out << "step,time";
  for (Index k = 0; k < reduced.final_state().size(); ++k) {
    out << ",alpha_" << k + 1;
  }
  out << ",error\n";
  for (size_t n = 0; n < reduced.states.size(); ++n) {
    out << n << ',' << reduced.times[n];
    for (Index k = 0; k < reduced.states[n].size(); ++k) {
      out << ',' << reduced.states[n][k];
    }
    out << ',';
    if (n >= 1 && n - 1 < errors.size()) {
      out << errors[n - 1];
    }
    out << '\n';
  }
}

void write_probes_csv(const std::filesystem::path& path, const FineModel& fine, const Vec& u) {
  std::ofstream out(path);
  if (!out) {
    throw InvalidArgument("cannot write " + path.string());
  }
  out.precision(12);
  out << "node,x,y,u\n";
  const Vec nodal = fine.dofs().extend(u);
  const auto& nodes = fine.mesh().nodes;
  for (size_t i = 0; i < nodes.size(); ++i) {
    out << i << ',' << nodes[i].x << ',' << nodes[i].y << ',' << nodal[static_cast<Index>(i)]
        << '\n';
  }
}

int run_offline(const std::string& config, const std::string& out_dir) {
  const ExperimentSpec spec = load_config(config);
  Pipeline pipeline(spec);
  const OfflineData data = pipeline.offline(spec.mu_offline, spec.local_points);
  save_offline(out_dir, spec, data);
  std::cout << "offline: N_f=" << data.space->fine_size() << " N_c=" << data.space->coarse_size()
            << " snapshots=" << data.snapshots.cols() << " seconds=" << data.seconds
            << " -> " << out_dir << '\n';
  return kOk;
}

int run_online(const std::string& config, const std::string& artifacts, const std::string& out,
               const std::string& probes, bool reference) {
  const ExperimentSpec spec = load_config(config);
  const OfflineArtifacts stored = load_offline(artifacts);
  require_same_geometry(spec, stored.spec);
  Pipeline pipeline(spec);
  if (pipeline.fine().size() != stored.data.space->fine_size()) {
    throw InvalidArgument("artifacts were built for a different mesh");
  }
  const int modes = spec.pod_modes * static_cast<int>(stored.data.mu_offline.size());
  const RomSystem rom = pipeline.build(stored.data, modes, spec.global_points);
  const FineModel& fine = pipeline.fine();
  const Vec alpha0 = rom_project(rom, fine, fine.initial_state(spec.u0_online, spec.source_online));
  RomStats stats;
  const Trajectory reduced = solve_rom(rom, spec.mu_online, rom_load(rom, fine.load(spec.source_online)),
                                       alpha0, spec.time, &stats);
  std::vector<double> errors;
  double t_fine = 0.0;
  if (reference) {
    const Trajectory& ref = pipeline.reference(spec.mu_online, spec.source_online, spec.u0_online);
    t_fine = ref.wall_seconds;
    const size_t steps = std::min(ref.states.size(), reduced.states.size());
    for (size_t n = 1; n < steps; ++n) {
      errors.push_back(energy_error(ref.states[n], downscale(rom, reduced.states[n]),
                                    fine.frozen_stiffness(ref.states[n], spec.mu_online)));
    }
  }
  if (!out.empty()) {
    write_trajectory_csv(out, reduced, errors);
  }
  if (!probes.empty()) {
    write_probes_csv(probes, fine, downscale(rom, reduced.final_state()));
  }
  std::cout << "online: N_r=" << rom.size() << " L=" << rom.points()
            << " mu=" << spec.mu_online << " steps=" << reduced.steps()
            << " t_gl=" << reduced.wall_seconds;
  if (reference) {
    std::cout << " t_fine=" << t_fine << " R=" << timing_ratio(reduced.wall_seconds, t_fine)
              << "% steady_error=" << (errors.empty() ? 0.0 : errors.back());
  }
  std::cout << '\n';
  return kOk;
}

int finish_rows(const std::vector<ResultRow>& rows, const std::string& out,
                const std::string& series) {
  if (!out.empty()) {
    write_results_csv(rows, out);
  }
  if (!series.empty()) {
    write_error_series_csv(rows, series);
  }
  int failed = 0;
  for (const ResultRow& r : rows) {
    std::cout << r.sweep << " N_r=" << r.pod_modes << " L=(" << r.local_points << ","
              << r.global_points << ") mu_on=" << r.mu_online << " error=" << r.steady_error
              << " R=" << r.ratio << "% " << r.status << '\n';
    failed += r.ok() ? 0 : 1;
  }
  return failed == 0 ? kOk : kPartial;
}

int run_compare(const std::string& config, const std::string& out, const std::string& series) {
  const ExperimentSpec spec = load_config(config);
  Pipeline pipeline(spec);
  const int modes = spec.pod_modes * static_cast<int>(spec.mu_offline.size());
  std::vector<ResultRow> rows{run_configuration(pipeline, "compare", spec.mu_offline, modes,
                                                spec.local_points, spec.global_points,
                                                spec.mu_online, spec.source_online,
                                                spec.u0_online)};
  return finish_rows(rows, out, series);
}

int run_sweep(int example, const std::string& config, const std::string& out,
              const std::string& series) {
  ExperimentSpec spec = config.empty() ? example_spec(example) : load_config(config);
  if (spec.example != example) {
    throw InvalidArgument("config is for example " + std::to_string(spec.example));
  }
  return finish_rows(run_example(spec), out, series);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global-local multiscale POD-DEIM model reduction"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::string config, artifacts, out, series, probes;
  bool no_reference = false;
  int example = 1;

  CLI::App* offline = app.add_subcommand("offline", "Build and store the offline stage");
  offline->add_option("--config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
  offline->add_option("--out", out, "Artifact directory")->required();

  CLI::App* online = app.add_subcommand("online", "Solve the reduced model from stored artifacts");
  online->add_option("--config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
  online->add_option("--artifacts", artifacts, "Artifact directory")->required()->check(CLI::ExistingDirectory);
  online->add_option("--out", out, "Reduced trajectory CSV");
  online->add_option("--probes", probes, "Downscaled final state CSV");
  online->add_flag("--no-reference", no_reference, "Skip the fine reference solve");

  CLI::App* compare = app.add_subcommand("compare", "Offline + online + fine reference for one configuration");
  compare->add_option("--config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", out, "Result CSV");
  compare->add_option("--series", series, "Error time series CSV");

  CLI::App* sweep = app.add_subcommand("sweep", "Run the studies of one numerical example");
  sweep->add_option("--example", example, "Example id")->required()->check(CLI::Range(1, 5));
  sweep->add_option("--config", config, "Overrides for the example defaults")->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "Result CSV");
  sweep->add_option("--series", series, "Error time series CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kFatal;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (offline->parsed()) {
      return run_offline(config, out);
    }
    if (online->parsed()) {
      return run_online(config, artifacts, out, probes, !no_reference);
    }
    if (compare->parsed()) {
      return run_compare(config, out, series);
    }
    return run_sweep(example, config, out, series);
  } catch (const std::exception& e) {
    std::cerr << "glrom: " << e.what() << '\n';
    return kFatal;
  }
}
