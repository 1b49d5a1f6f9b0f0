#pragma once

#include <vector>

#include <Eigen/SparseCholesky>

#include "glrom/fem.hpp"
#include "glrom/grid.hpp"
#include "glrom/model.hpp"
#include "glrom/types.hpp"

namespace glrom {

struct TimeSteppingConfig {
  double dt = 0.05;
  double t_final = 2.0;
  double newton_tol = 1e-8;  // on the Euclidean norm of the Newton correction
  int max_newton = 25;
  double steady_tol = 1e-8;  // ||U^{n+1} - U^n|| / dt below this marks steady state
  bool stop_at_steady = false;

  void validate() const;
  int step_count() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;  // states[0] is the initial condition
  std::vector<int> newton_iterations;  // one per accepted step
  double wall_seconds = 0.0;
  int steady_step = -1;  // first step meeting steady_tol, -1 if never

  Index steps() const { return static_cast<Index>(newton_iterations.size()); }
  const Vec& final_state() const { return states.back(); }
  Mat as_matrix() const;  // states as columns
};

/// Fine-scale operators on the interior dofs with homogeneous Dirichlet data:
/// stiffness A_q (weight kappa_q), its element blocks, consistent mass M and
/// a cached factorization of M.
class FineModel {
 public:
  FineModel(FineMesh mesh, PermeabilityField kappa, Nonlinearity b);

  const FineMesh& mesh() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  const PermeabilityField& permeability() const { return kappa_; }
  const Nonlinearity& nonlinearity() const { return b_; }
  const SpMat& stiffness() const { return stiffness_; }
  const ElementStiffness& elements() const { return elements_; }
  const SpMat& mass() const { return mass_; }
  Index size() const { return dofs_.size(); }

  Vec load(const Source& h) const;
  Vec w0(const Source& h) const;
  Vec initial_state(const InitialCondition& u0, const Source& h) const;
  Vec mass_solve(const Vec& rhs) const;

  /// b at the eliminated (zero) boundary values.
  double boundary_b(double mu) const { return b_.value(0.0, mu); }

  /// sum_T kappa_T bbar_T K_T at a fixed state: the operator of F frozen at u.
  SpMat frozen_stiffness(const Vec& u, double mu) const;

 private:
  FineMesh mesh_;
  PermeabilityField kappa_;
  Nonlinearity b_;
  DofMap dofs_;
  SpMat stiffness_;
  ElementStiffness elements_;
  SpMat mass_;
  Eigen::SimplicialLDLT<SpMat> mass_factor_;
};

/// b(u_j, mu) for every entry of u.
Vec nodal_values(const Nonlinearity& b, const Vec& u, double mu);

/// F(U) = sum_T kappa_T bbar_T K_T U with bbar_T the mean of b(u_j, mu) over
/// the vertices of T.
Vec assemble_F(const FineModel& model, const Vec& u, double mu);

/// Same with externally supplied nodal b-values (e.g. interpolated ones).
Vec assemble_F(const FineModel& model, const Vec& u, const Vec& b, double mu);

/// Nonlinear remainder N(U) = F(U) - b(0, mu) A_q U.
Vec assemble_remainder(const FineModel& model, const Vec& u, double mu);

/// Backward-Euler residual U - U^n + dt M^-1 (F(U) - H).
Vec fine_residual(const FineModel& model, const Vec& u, const Vec& u_prev, double mu, double dt,
                  const Vec& load);

/// Action of J = I + dt M^-1 DF(U) at a fixed state, where
/// DF = sum_T K_T (bbar_T + (K_T U) (grad bbar_T)^T); the first part
/// carries the b-values, the second the u db/du terms.
class JacobianOperator {
 public:
  JacobianOperator(const FineModel& model, const Vec& u, double mu, double dt);
  Vec apply(const Vec& v) const;
  /// M J = M + dt DF, used for the Newton solve.
  SpMat scaled_matrix() const;
  const SpMat& tangent() const { return tangent_; }

 private:
  const FineModel& model_;
  SpMat tangent_;
  double dt_;
};

JacobianOperator assemble_J(const FineModel& model, const Vec& u, double mu, double dt);

struct StepResult {
  Vec state;
  // Corrections taken before the one that passed the tolerance test; a
  // linear problem converges in 1, a start at the solution in 0.
  int iterations = 0;
};

/// One implicit step by Newton iteration from U^{n+1}_(0) = U^n.
StepResult step_newton(const FineModel& model, const Vec& u_prev, double mu, const Vec& load,
                       const TimeSteppingConfig& config, int step_index = 0);

Trajectory solve_fom(const FineModel& model, double mu, const Vec& load, const Vec& u0,
                     const TimeSteppingConfig& config);

/// Uses the first mu of the set, its source and its initial condition.
Trajectory solve_fom(const FineModel& model, const ParameterSet& theta,
                     const TimeSteppingConfig& config);

/// Shared Newton bookkeeping: tracks growth of the correction norm.
class NewtonMonitor {
 public:
  explicit NewtonMonitor(int step_index) : step_(step_index) {}
  /// Returns true once the correction is below tol; throws on divergence.
  bool accept(double correction_norm, double tol);

 private:
  int step_;
  double last_ = -1.0;
  int growth_ = 0;
};

}  // namespace glrom
