#include "glrom/fom.hpp"

#include <chrono>
#include <cmath>

#include <Eigen/SparseLU>

namespace glrom {

void TimeSteppingConfig::validate() const {
  if (!(dt > 0.0) || !(t_final > 0.0)) {
    throw InvalidArgument("time stepping: dt and t_final must be positive");
  }
  if (!(newton_tol > 0.0) || max_newton < 1) {
    throw InvalidArgument("time stepping: newton_tol > 0 and max_newton >= 1 required");
  }
}

int TimeSteppingConfig::step_count() const {
  return std::max(1, static_cast<int>(std::lround(t_final / dt)));
}

Mat Trajectory::as_matrix() const {
  if (states.empty()) {
    return {};
  }
  Mat m(states.front().size(), static_cast<Index>(states.size()));
  for (size_t k = 0; k < states.size(); ++k) {
    m.col(static_cast<Index>(k)) = states[k];
  }
  return m;
}

FineModel::FineModel(FineMesh mesh, PermeabilityField kappa, Nonlinearity b)
    : mesh_(std::move(mesh)), kappa_(std::move(kappa)), b_(b) {
  if (static_cast<int>(kappa_.values.size()) != mesh_.triangle_count()) {
    throw InvalidArgument("permeability size does not match the mesh");
  }
  dofs_ = make_dof_map(mesh_.node_count(), mesh_.boundary_nodes);
  if (dofs_.size() == 0) {
    throw InvalidArgument("mesh has no interior nodes");
  }
  stiffness_ = restrict_operator(assemble_stiffness(mesh_, kappa_.values), dofs_);
  elements_ = ElementStiffness(mesh_, kappa_.values, dofs_);
  mass_ = restrict_operator(assemble_mass(mesh_), dofs_);
  mass_factor_.compute(mass_);
  if (mass_factor_.info() != Eigen::Success) {
    throw NumericalError("mass matrix factorization failed");
  }
}

Vec FineModel::load(const Source& h) const {
  return dofs_.restrict(assemble_load(mesh_, h));
}

Vec FineModel::w0(const Source& h) const {
  return solve_elliptic_w0(mesh_, kappa_, h);
}

Vec FineModel::initial_state(const InitialCondition& u0, const Source& h) const {
  switch (u0.kind) {
    case InitialCondition::Kind::ScaledW0:
      return u0.scale * w0(h);
    case InitialCondition::Kind::Zero:
      return Vec::Zero(size());
    case InitialCondition::Kind::Explicit:
      if (u0.values.size() != size()) {
        throw InvalidArgument("explicit initial condition has the wrong size");
      }
      return u0.values;
  }
  return Vec::Zero(size());
}

Vec FineModel::mass_solve(const Vec& rhs) const {
  return mass_factor_.solve(rhs);
}

SpMat FineModel::frozen_stiffness(const Vec& u, double mu) const {
  return elements_.weighted(nodal_values(b_, u, mu), boundary_b(mu));
}

Vec nodal_values(const Nonlinearity& b, const Vec& u, double mu) {
  Vec values(u.size());
  for (Index j = 0; j < u.size(); ++j) {
    values[j] = b.value(u[j], mu);
  }
  return values;
}

Vec assemble_F(const FineModel& model, const Vec& u, double mu) {
  return assemble_F(model, u, nodal_values(model.nonlinearity(), u, mu), mu);
}

Vec assemble_F(const FineModel& model, const Vec& u, const Vec& b, double mu) {
  if (u.size() != model.size() || b.size() != model.size()) {
    throw InvalidArgument("assemble_F: dimension mismatch");
  }
  return model.elements().apply(u, b, model.boundary_b(mu));
}

Vec assemble_remainder(const FineModel& model, const Vec& u, double mu) {
  if (u.size() != model.size()) {
    throw InvalidArgument("assemble_remainder: dimension mismatch");
  }
  const double b0 = model.boundary_b(mu);
  const Vec shifted = nodal_values(model.nonlinearity(), u, mu).array() - b0;
  return model.elements().apply(u, shifted, 0.0);
}

Vec fine_residual(const FineModel& model, const Vec& u, const Vec& u_prev, double mu, double dt,
                  const Vec& load) {
  return u - u_prev + dt * model.mass_solve(assemble_F(model, u, mu) - load);
}

JacobianOperator::JacobianOperator(const FineModel& model, const Vec& u, double mu, double dt)
    : model_(model), dt_(dt) {
  const Nonlinearity& b = model.nonlinearity();
  const Vec values = nodal_values(b, u, mu);
  Vec slopes(u.size());
  for (Index j = 0; j < u.size(); ++j) {
    slopes[j] = b.derivative_from_value(values[j], mu);
  }
  tangent_ = model.elements().jacobian(u, values, slopes, model.boundary_b(mu));
}

Vec JacobianOperator::apply(const Vec& v) const {
  if (dt_ == 0.0) {
    return v;
  }
  return v + dt_ * model_.mass_solve(tangent_ * v);
}

SpMat JacobianOperator::scaled_matrix() const {
  SpMat m = dt_ * tangent_;
  m += model_.mass();
  return m;
}

JacobianOperator assemble_J(const FineModel& model, const Vec& u, double mu, double dt) {
  return JacobianOperator(model, u, mu, dt);
}

bool NewtonMonitor::accept(double correction_norm, double tol) {
  if (!std::isfinite(correction_norm)) {
    throw ConvergenceError("Newton produced a non-finite correction", step_);
  }
  if (correction_norm < tol) {
    return true;
  }
  if (last_ >= 0.0 && correction_norm > last_) {
    if (++growth_ >= 3) {
      throw ConvergenceError("Newton diverging: correction grew three times in a row", step_);
    }
  } else {
    growth_ = 0;
  }
  last_ = correction_norm;
  return false;
}

namespace {

void check_exponent(const Nonlinearity& b, const Vec& u, double mu, int step) {
  for (Index j = 0; j < u.size(); ++j) {
    if (b.exceeds(u[j], mu)) {
      throw OverflowError("converged state hits the exponent bound at time step " +
                          std::to_string(step));
    }
  }
}

// Solves M J du = -M R without forming M^-1.
class FineNewton {
 public:
  explicit FineNewton(const FineModel& model) : model_(model) {}

  StepResult step(const Vec& u_prev, double mu, const Vec& load, const TimeSteppingConfig& config,
                  int step_index) {
    StepResult out{u_prev, 0};
    NewtonMonitor monitor(step_index);
    const Nonlinearity& b = model_.nonlinearity();
    for (int k = 0; k < config.max_newton; ++k) {
      const JacobianOperator jac(model_, out.state, mu, config.dt);
      const Vec f = assemble_F(model_, out.state, mu);
      const Vec scaled_residual =
          model_.mass() * (out.state - u_prev) + config.dt * (f - load);
      const SpMat matrix = jac.scaled_matrix();
      if (!analyzed_) {
        lu_.analyzePattern(matrix);
        analyzed_ = true;
      }
      lu_.factorize(matrix);
      if (lu_.info() != Eigen::Success) {
        throw NumericalError("fine Newton: Jacobian factorization failed at step " +
                             std::to_string(step_index));
      }
      const Vec delta = lu_.solve(-scaled_residual);
      out.state += delta;
      out.iterations = k;
      if (monitor.accept(delta.norm(), config.newton_tol)) {
        check_exponent(b, out.state, mu, step_index);
        return out;
      }
    }
    throw ConvergenceError("fine Newton hit the iteration cap", step_index);
  }

 private:
  const FineModel& model_;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

}  // namespace

StepResult step_newton(const FineModel& model, const Vec& u_prev, double mu, const Vec& load,
                       const TimeSteppingConfig& config, int step_index) {
  config.validate();
  FineNewton newton(model);
  return newton.step(u_prev, mu, load, config, step_index);
}

Trajectory solve_fom(const FineModel& model, double mu, const Vec& load, const Vec& u0,
                     const TimeSteppingConfig& config) {
  config.validate();
  if (u0.size() != model.size() || load.size() != model.size()) {
    throw InvalidArgument("solve_fom: initial state or load has the wrong size");
  }
  const auto start = std::chrono::steady_clock::now();
  FineNewton newton(model);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(u0);
  const int steps = config.step_count();
  for (int n = 1; n <= steps; ++n) {
    StepResult r = newton.step(traj.states.back(), mu, load, config, n);
    const double rate = (r.state - traj.states.back()).norm() / config.dt;
    traj.times.push_back(n * config.dt);
    traj.states.push_back(std::move(r.state));
    traj.newton_iterations.push_back(r.iterations);
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

Trajectory solve_fom(const FineModel& model, const ParameterSet& theta,
                     const TimeSteppingConfig& config) {
  theta.validate();
  return solve_fom(model, theta.mu_values.front(), model.load(theta.h),
                   model.initial_state(theta.u0, theta.h), config);
}

}  // namespace glrom
