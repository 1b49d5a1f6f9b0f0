#pragma once

#include <optional>
#include <span>
#include <vector>

#include "glrom/fom.hpp"
#include "glrom/gmsfem.hpp"
#include "glrom/reduction.hpp"

namespace glrom {

/// DEIM model for the nodal values of b over one coarse neighborhood.
struct RegionDeim {
  int region = 0;
  std::vector<int> dofs;         // interior dofs inside the neighborhood
  DeimModel model;               // rows index into `dofs`
  std::vector<int> sample_dofs;  // interpolation points as global dofs
  std::vector<int> owned_dofs;   // dofs whose value this region reconstructs
  Mat owned_projector;           // projector rows of the owned dofs
};

/// Local DEIM models of b, one per coarse neighborhood. Neighborhoods
/// overlap; each dof takes its value from the region of its nearest coarse
/// node.
struct LocalDeimSet {
  std::vector<RegionDeim> regions;
  int points_per_region = 0;

  /// Reconstructed nodal b-values over all dofs from the sampled points.
  Vec reconstruct(const Vec& u, double mu, const Nonlinearity& b) const;
  int total_points() const;
};

/// Fine-dof states of one offline run at a given mu.
struct TrainingRun {
  double mu = 0.0;
  Mat states;  // N_f x n_s
};

LocalDeimSet train_local_deim(std::span<const TrainingRun> runs, const FineMesh& mesh,
                              const CoarseGrid& grid, const DofMap& dofs, const Nonlinearity& b,
                              int points_per_region);

/// Galerkin system on range(Phi): M~ = Phi^T M Phi, F~(z) = Phi^T F(Phi z).
/// Without a LocalDeimSet the nonlinearity is evaluated at every fine dof.
class CoarseModel {
 public:
  CoarseModel(const FineModel& fine, SpMat basis, std::optional<LocalDeimSet> local = {});

  const FineModel& fine() const { return fine_; }
  const SpMat& basis() const { return basis_; }
  const Mat& mass() const { return mass_; }
  const std::optional<LocalDeimSet>& local_deim() const { return local_; }
  Index size() const { return basis_.cols(); }

  Vec downscale(const Vec& z) const { return basis_ * z; }
  Vec load(const Vec& fine_load) const;
  /// M-weighted least-squares fit of a fine state into range(Phi).
  Vec project(const Vec& u) const;
  Vec mass_solve(const Vec& rhs) const { return mass_factor_.solve(rhs); }

  /// Nodal b-values at u, exact or locally interpolated.
  Vec nonlinear_values(const Vec& u, double mu) const;
  Vec reduced_F(const Vec& z, double mu) const;
  /// Phi^T DF(Phi z) Phi with b from nonlinear_values and db/du = mu b.
  Mat reduced_tangent(const Vec& z, double mu) const;

 private:
  const FineModel& fine_;
  SpMat basis_;
  std::optional<LocalDeimSet> local_;
  Mat mass_;
  Eigen::LLT<Mat> mass_factor_;
};

struct CoarseSolution {
  Trajectory trajectory;  // coarse coordinates z^n
  Mat snapshots;          // Z: one column per accepted step z^1..z^{N_t}
  Mat f_snapshots;        // N(Phi z^n) = F - b(0, mu) A_q Phi z^n, fine dimension, exact b
};

/// Backward Euler with Newton on the coarse system. The initial coarse state
/// is the M-weighted projection of `u0`.
CoarseSolution solve_coarse(const CoarseModel& model, double mu, const Vec& fine_load,
                            const Vec& u0, const TimeSteppingConfig& config);

}  // namespace glrom
