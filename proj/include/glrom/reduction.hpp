#pragma once

#include <span>
#include <vector>

#include "glrom/types.hpp"

namespace glrom {

/// Orthonormal modes of a snapshot set, most energetic first.
struct PodBasis {
  Mat modes;               // n x m, orthonormal columns
  Vec eigenvalues;         // m retained Gram eigenvalues, nonincreasing
  Vec all_eigenvalues;     // every Gram eigenvalue, nonincreasing, clipped at 0
  Index numerical_rank = 0;  // eigenvalues above the relative cutoff

  Index size() const { return modes.cols(); }
  // Sum of the discarded eigenvalues: the squared Frobenius projection error.
  double truncation_energy() const;
};

/// Eigenvalues below this fraction of the largest are treated as zero.
inline constexpr double kPodCutoff = 1e-12;

/// POD with a fixed mode count. If fewer than `m` eigenvalues clear the
/// cutoff, the basis is shortened and a warning logged.
PodBasis pod(const Mat& snapshots, Index m);

/// Smallest m whose cumulative energy fraction reaches `energy_fraction`.
PodBasis pod_energy(const Mat& snapshots, double energy_fraction);

/// Interpolation points and the stored projector basis * (P^T basis)^-1.
struct DeimModel {
  Mat basis;                  // n x m
  std::vector<Index> indices; // m distinct row ids
  Mat projector;              // n x m
  double condition_number = 1.0;

  Index size() const { return static_cast<Index>(indices.size()); }
  Index dimension() const { return basis.rows(); }

  /// f restricted to the interpolation rows, in index order.
  Vec sample(const Vec& f) const;

  /// projector * sampled_values.
  Vec apply(const Vec& sampled_values) const;
  Vec apply(std::span<const double> sampled_values) const;
};

/// Greedy DEIM point selection; ties go to the smallest row.
std::vector<Index> deim_indices(const Mat& basis);

DeimModel deim_select(const Mat& basis);
inline DeimModel deim_select(const PodBasis& pod_basis) { return deim_select(pod_basis.modes); }

}  // namespace glrom
