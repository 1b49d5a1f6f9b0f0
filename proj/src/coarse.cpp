#include "glrom/coarse.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

namespace glrom {

Vec LocalDeimSet::reconstruct(const Vec& u, double mu, const Nonlinearity& b) const {
  Vec values = Vec::Zero(u.size());
  for (const RegionDeim& r : regions) {
    if (r.owned_dofs.empty()) {
      continue;
    }
    Vec samples(static_cast<Index>(r.sample_dofs.size()));
    for (size_t k = 0; k < r.sample_dofs.size(); ++k) {
      samples[static_cast<Index>(k)] = b.value(u[r.sample_dofs[k]], mu);
    }
    const Vec local = r.owned_projector * samples;
    for (size_t k = 0; k < r.owned_dofs.size(); ++k) {
      values[r.owned_dofs[k]] = local[static_cast<Index>(k)];
    }
  }
  return values;
}

int LocalDeimSet::total_points() const {
  int total = 0;
  for (const RegionDeim& r : regions) {
    total += static_cast<int>(r.sample_dofs.size());
  }
  return total;
}

LocalDeimSet train_local_deim(std::span<const TrainingRun> runs, const FineMesh& mesh,
                              const CoarseGrid& grid, const DofMap& dofs, const Nonlinearity& b,
                              int points_per_region) {
  if (points_per_region < 1) {
    throw InvalidArgument("train_local_deim: need at least one point per region");
  }
  if (runs.empty()) {
    throw InvalidArgument("train_local_deim: no training runs");
  }
  Index columns = 0;
  for (const TrainingRun& run : runs) {
    if (run.states.rows() != dofs.size()) {
      throw InvalidArgument("train_local_deim: training states have the wrong size");
    }
    columns += run.states.cols();
  }
  const std::vector<int> owner = nearest_coarse_node(mesh, grid);

  LocalDeimSet set;
  set.points_per_region = points_per_region;
  for (const Region& region : grid.regions) {
    RegionDeim r;
    r.region = region.coarse_node;
    for (int node : region.nodes) {
      if (dofs.node_to_dof[node] >= 0) {
        r.dofs.push_back(dofs.node_to_dof[node]);
      }
    }
    if (r.dofs.empty()) {
      set.regions.push_back(std::move(r));
      continue;
    }
    const Index n = static_cast<Index>(r.dofs.size());
    Mat snapshots(n, columns);
    Index col = 0;
    for (const TrainingRun& run : runs) {
      for (Index s = 0; s < run.states.cols(); ++s, ++col) {
        for (Index k = 0; k < n; ++k) {
          snapshots(k, col) = b.value(run.states(r.dofs[k], s), run.mu);
        }
      }
    }
    Index m = points_per_region;
    if (m > std::min(n, columns)) {
      spdlog::warn("region {}: {} local points requested, only {} available", r.region, m,
                   std::min(n, columns));
      m = std::min(n, columns);
    }
    r.model = deim_select(pod(snapshots, m));
    for (Index idx : r.model.indices) {
      r.sample_dofs.push_back(r.dofs[idx]);
    }
    std::vector<Index> owned_rows;
    for (Index k = 0; k < n; ++k) {
      if (owner[dofs.dof_to_node[r.dofs[k]]] == region.coarse_node) {
        owned_rows.push_back(k);
        r.owned_dofs.push_back(r.dofs[k]);
      }
    }
    r.owned_projector.resize(static_cast<Index>(owned_rows.size()), r.model.size());
    for (size_t k = 0; k < owned_rows.size(); ++k) {
      r.owned_projector.row(static_cast<Index>(k)) = r.model.projector.row(owned_rows[k]);
    }
    set.regions.push_back(std::move(r));
  }
  return set;
}

CoarseModel::CoarseModel(const FineModel& fine, SpMat basis, std::optional<LocalDeimSet> local)
    : fine_(fine), basis_(std::move(basis)), local_(std::move(local)) {
  if (basis_.rows() != fine_.size()) {
    throw InvalidArgument("coarse basis rows do not match the fine dofs");
  }
  const SpMat mphi = fine_.mass() * basis_;
  mass_ = Mat(basis_.transpose() * mphi);
  mass_ = 0.5 * (mass_ + mass_.transpose());
  mass_factor_.compute(mass_);
  if (mass_factor_.info() != Eigen::Success) {
    throw NumericalError("coarse mass matrix is not SPD (basis rank deficient?)");
  }
}

Vec CoarseModel::load(const Vec& fine_load) const {
  return basis_.transpose() * fine_load;
}

Vec CoarseModel::project(const Vec& u) const {
  return mass_factor_.solve(Vec(basis_.transpose() * (fine_.mass() * u)));
}

Vec CoarseModel::nonlinear_values(const Vec& u, double mu) const {
  if (local_) {
    return local_->reconstruct(u, mu, fine_.nonlinearity());
  }
  return nodal_values(fine_.nonlinearity(), u, mu);
}

Vec CoarseModel::reduced_F(const Vec& z, double mu) const {
  const Vec u = downscale(z);
  return basis_.transpose() * assemble_F(fine_, u, nonlinear_values(u, mu), mu);
}

Mat CoarseModel::reduced_tangent(const Vec& z, double mu) const {
  const Vec u = downscale(z);
  const Vec bv = nonlinear_values(u, mu);
  Vec slopes(u.size());
  for (Index j = 0; j < u.size(); ++j) {
    slopes[j] = fine_.nonlinearity().derivative_from_value(bv[j], mu);
  }
  const SpMat tangent = fine_.elements().jacobian(u, bv, slopes, fine_.boundary_b(mu));
  const SpMat inner = tangent * basis_;
  return Mat(basis_.transpose() * inner);
}

CoarseSolution solve_coarse(const CoarseModel& model, double mu, const Vec& fine_load,
                            const Vec& u0, const TimeSteppingConfig& config) {
  config.validate();
  const FineModel& fine = model.fine();
  if (u0.size() != fine.size() || fine_load.size() != fine.size()) {
    throw InvalidArgument("solve_coarse: initial state or load has the wrong size");
  }
  const auto start = std::chrono::steady_clock::now();
  const Vec load = model.load(fine_load);
  CoarseSolution out;
  Trajectory& traj = out.trajectory;
  traj.times.push_back(0.0);
  traj.states.push_back(model.project(u0));

  const int steps = config.step_count();
  for (int n = 1; n <= steps; ++n) {
    const Vec& z_prev = traj.states.back();
    Vec z = z_prev;
    NewtonMonitor monitor(n);
    int iterations = -1;
    for (int k = 0; k < config.max_newton; ++k) {
      const Vec residual =
          model.mass() * (z - z_prev) + config.dt * (model.reduced_F(z, mu) - load);
      const Mat jac = model.mass() + config.dt * model.reduced_tangent(z, mu);
      const Vec delta = jac.partialPivLu().solve(-residual);
      z += delta;
      if (monitor.accept(delta.norm(), config.newton_tol)) {
        iterations = k;
        break;
      }
    }
    if (iterations < 0) {
      throw ConvergenceError("coarse Newton hit the iteration cap", n);
    }
    const Vec u = model.downscale(z);
    for (Index j = 0; j < u.size(); ++j) {
      if (fine.nonlinearity().exceeds(u[j], mu)) {
        throw OverflowError("coarse state hits the exponent bound at time step " +
                            std::to_string(n));
      }
    }
    const double rate = (z - z_prev).norm() / config.dt;
    traj.times.push_back(n * config.dt);
    traj.states.push_back(std::move(z));
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

  out.snapshots = traj.as_matrix().rightCols(traj.steps());
  out.f_snapshots.resize(fine.size(), out.snapshots.cols());
  for (Index c = 0; c < out.snapshots.cols(); ++c) {
    out.f_snapshots.col(c) = assemble_remainder(fine, model.downscale(out.snapshots.col(c)), mu);
  }
  return out;
}

}  // namespace glrom
