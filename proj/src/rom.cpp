#include "glrom/rom.hpp"

#include <algorithm>
#include <chrono>

#include <spdlog/spdlog.h>

namespace glrom {

RowEvaluator::RowEvaluator(const ElementStiffness& elements, const Mat& reduced_to_fine,
                           std::span<const Index> rows) {
  if (reduced_to_fine.rows() != elements.size()) {
    throw InvalidArgument("RowEvaluator: basis rows do not match the dofs");
  }
  for (Index dof : rows) {
    if (dof < 0 || dof >= elements.size()) {
      throw InvalidArgument("RowEvaluator: row index out of range");
    }
    Row row;
    row.dof = dof;
    std::vector<Index> stencil;
    auto position = [&stencil](Index d) {
      if (d < 0) {
        return -1;
      }
      auto it = std::find(stencil.begin(), stencil.end(), d);
      if (it == stencil.end()) {
        stencil.push_back(d);
        return static_cast<int>(stencil.size()) - 1;
      }
      return static_cast<int>(it - stencil.begin());
    };
    for (int id : elements.incident(dof)) {
      const auto& e = elements.elements()[id];
      const int a = static_cast<int>(std::find(e.dof.begin(), e.dof.end(), dof) - e.dof.begin());
      Local local;
      for (int c = 0; c < 3; ++c) {
        local.vertex[c] = position(e.dof[c]);
        local.coefficient[c] = e.block[a][c];
      }
      row.elements.push_back(local);
    }
    row.basis_rows.resize(static_cast<Index>(stencil.size()), reduced_to_fine.cols());
    for (size_t k = 0; k < stencil.size(); ++k) {
      row.basis_rows.row(static_cast<Index>(k)) = reduced_to_fine.row(stencil[k]);
    }
    rows_.push_back(std::move(row));
  }
}

Index RowEvaluator::stencil_size() const {
  Index total = 0;
  for (const Row& r : rows_) {
    total += r.basis_rows.rows();
  }
  return total;
}

void RowEvaluator::evaluate(const Vec& alpha, double mu, const Nonlinearity& b, Vec& values,
                            Mat* jacobian) const {
  values.resize(size());
  if (jacobian) {
    jacobian->setZero(size(), alpha.size());
  }
  const double b_boundary = b.value(0.0, mu);
  for (Index r = 0; r < size(); ++r) {
    const Row& row = rows_[r];
    const Vec u = row.basis_rows * alpha;
    Vec bv(u.size());
    for (Index k = 0; k < u.size(); ++k) {
      bv[k] = b.value(u[k], mu);
    }
    double acc = 0.0;
    for (const Local& e : row.elements) {
      double bbar = 0.0;
      double ku = 0.0;
      for (int c = 0; c < 3; ++c) {
        if (e.vertex[c] < 0) {
          bbar += b_boundary;
        } else {
          bbar += bv[e.vertex[c]];
          ku += e.coefficient[c] * u[e.vertex[c]];
        }
      }
      bbar = bbar / 3.0 - b_boundary;
      acc += bbar * ku;
      if (jacobian) {
        for (int c = 0; c < 3; ++c) {
          const int k = e.vertex[c];
          if (k < 0) {
            continue;
          }
          const double d = bbar * e.coefficient[c] +
                           ku * b.derivative_from_value(bv[k], mu) / 3.0;
          jacobian->row(r) += d * row.basis_rows.row(k);
        }
      }
    }
    values[r] = acc;
  }
}

bool RowEvaluator::exceeds(const Vec& alpha, double mu, const Nonlinearity& b) const {
  for (const Row& row : rows_) {
    const Vec u = row.basis_rows * alpha;
    for (Index k = 0; k < u.size(); ++k) {
      if (b.exceeds(u[k], mu)) {
        return true;
      }
    }
  }
  return false;
}

RomSystem build_rom(const Mat& snapshots, const Mat& f_snapshots, Index reduced_size,
                    Index global_points, const SpMat& basis, const FineModel& fine) {
  if (snapshots.rows() != basis.cols()) {
    throw InvalidArgument("build_rom: snapshot rows do not match the coarse dimension");
  }
  if (f_snapshots.rows() != fine.size()) {
    throw InvalidArgument("build_rom: F snapshots must have the fine dimension");
  }
  RomSystem rom;
  rom.nonlinearity = fine.nonlinearity();

  Index n_r = std::min(reduced_size, std::min(snapshots.rows(), snapshots.cols()));
  if (n_r < reduced_size) {
    spdlog::warn("build_rom: {} POD modes requested, at most {} possible", reduced_size, n_r);
  }
  rom.pod_basis = pod(snapshots, n_r);

  Index points = std::min(global_points, std::min(f_snapshots.rows(), f_snapshots.cols()));
  if (points < global_points) {
    spdlog::warn("build_rom: {} global points requested, at most {} possible", global_points,
                 points);
  }
  rom.global_deim = deim_select(pod(f_snapshots, points));

  rom.reduced_to_fine = basis * rom.pod_basis.modes;
  const Mat& v = rom.reduced_to_fine;
  rom.mass = v.transpose() * (fine.mass() * v);
  rom.mass = 0.5 * (rom.mass + rom.mass.transpose());
  rom.stiffness = v.transpose() * (fine.stiffness() * v);
  rom.stiffness = 0.5 * (rom.stiffness + rom.stiffness.transpose());
  rom.mass_factor.compute(rom.mass);
  if (rom.mass_factor.info() != Eigen::Success) {
    throw NumericalError("build_rom: reduced mass matrix is not SPD");
  }
  rom.closure = v.transpose() * rom.global_deim.projector;
  rom.rows = RowEvaluator(fine.elements(), v, rom.global_deim.indices);
  return rom;
}

Vec rom_load(const RomSystem& rom, const Vec& fine_load) {
  return rom.reduced_to_fine.transpose() * fine_load;
}

Vec rom_project(const RomSystem& rom, const FineModel& fine, const Vec& u) {
  return rom.mass_factor.solve(Vec(rom.reduced_to_fine.transpose() * (fine.mass() * u)));
}

Vec rom_F_hat(const RomSystem& rom, const Vec& alpha, double mu, RomStats* stats) {
  if (alpha.size() != rom.size()) {
    throw InvalidArgument("rom_F_hat: alpha has the wrong size");
  }
  Vec values;
  rom.rows.evaluate(alpha, mu, rom.nonlinearity, values, nullptr);
  if (stats) {
    stats->row_gathers += static_cast<std::uint64_t>(rom.rows.size());
  }
  return rom.nonlinearity.value(0.0, mu) * (rom.stiffness * alpha) + rom.closure * values;
}

Trajectory solve_rom(const RomSystem& rom, double mu, const Vec& reduced_load, const Vec& alpha0,
                     const TimeSteppingConfig& config, RomStats* stats) {
  config.validate();
  if (alpha0.size() != rom.size() || reduced_load.size() != rom.size()) {
    throw InvalidArgument("solve_rom: initial state or load has the wrong size");
  }
  const auto start = std::chrono::steady_clock::now();
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(alpha0);
  Vec values;
  Mat jac_rows;
  const Mat linear = rom.nonlinearity.value(0.0, mu) * rom.stiffness;
  const int steps = config.step_count();
  for (int n = 1; n <= steps; ++n) {
    const Vec& a_prev = traj.states.back();
    Vec a = a_prev;
    NewtonMonitor monitor(n);
    int iterations = -1;
    for (int k = 0; k < config.max_newton; ++k) {
      rom.rows.evaluate(a, mu, rom.nonlinearity, values, &jac_rows);
      if (stats) {
        stats->row_gathers += static_cast<std::uint64_t>(rom.rows.size());
        stats->newton_iterations += 1;
        stats->gathers_per_iteration.push_back(static_cast<std::uint64_t>(rom.rows.size()));
      }
      const Vec residual =
          rom.mass * (a - a_prev) + config.dt * (linear * a + rom.closure * values - reduced_load);
      const Mat jac = rom.mass + config.dt * (linear + rom.closure * jac_rows);
      const Vec delta = jac.partialPivLu().solve(-residual);
      a += delta;
      if (monitor.accept(delta.norm(), config.newton_tol)) {
        iterations = k;
        break;
      }
    }
    if (iterations < 0) {
      throw ConvergenceError("reduced Newton hit the iteration cap", n);
    }
    if (rom.rows.exceeds(a, mu, rom.nonlinearity)) {
      throw OverflowError("reduced state hits the exponent bound at time step " +
                          std::to_string(n));
    }
    const double rate = (a - a_prev).norm() / config.dt;
    traj.times.push_back(n * config.dt);
    traj.states.push_back(std::move(a));
    traj.newton_iterations.push_back(iterations);
    if (traj.steady_step < 0 && rate < config.steady_tol) {
      traj.steady_step = n;
      if (config.stop_at_steady) {
        break;
      }
    }
  }
  traj.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return traj;
}

Vec downscale(const RomSystem& rom, const Vec& alpha) {
  if (alpha.size() != rom.size()) {
    throw InvalidArgument("downscale: alpha has the wrong size");
  }
  return rom.reduced_to_fine * alpha;
}

}  // namespace glrom
