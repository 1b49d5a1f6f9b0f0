#include "glrom/reduction.hpp"

#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

namespace glrom {

double PodBasis::truncation_energy() const {
  double tail = 0.0;
  for (Index i = size(); i < all_eigenvalues.size(); ++i) {
    tail += all_eigenvalues[i];
  }
  return tail;
}

namespace {

struct GramSpectrum {
  Vec eigenvalues;  // nonincreasing, clipped at 0
  Mat vectors;      // matching columns
  Index rank = 0;
};

GramSpectrum gram_spectrum(const Mat& snapshots) {
  if (snapshots.cols() < 1 || snapshots.rows() < 1) {
    throw InvalidArgument("pod: empty snapshot matrix");
  }
  if (!snapshots.allFinite()) {
    throw InvalidArgument("pod: snapshot matrix has non-finite entries");
  }
  const Mat gram = snapshots.transpose() * snapshots;
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("pod: Gram eigendecomposition failed");
  }
  const Index ns = gram.rows();
  GramSpectrum s;
  s.eigenvalues.resize(ns);
  s.vectors.resize(ns, ns);
  for (Index k = 0; k < ns; ++k) {
    s.eigenvalues[k] = std::max(eig.eigenvalues()[ns - 1 - k], 0.0);
    s.vectors.col(k) = eig.eigenvectors().col(ns - 1 - k);
  }
  if (!(s.eigenvalues[0] > 0.0)) {
    throw InvalidArgument("pod: snapshot matrix is identically zero");
  }
  const double cutoff = kPodCutoff * s.eigenvalues[0];
  while (s.rank < ns && s.eigenvalues[s.rank] > cutoff) {
    ++s.rank;
  }
  return s;
}

PodBasis build_basis(const Mat& snapshots, const GramSpectrum& s, Index m) {
  PodBasis basis;
  basis.all_eigenvalues = s.eigenvalues;
  basis.numerical_rank = s.rank;
  basis.eigenvalues = s.eigenvalues.head(m);
  basis.modes = snapshots * s.vectors.leftCols(m);
  for (Index k = 0; k < m; ++k) {
    basis.modes.col(k) /= std::sqrt(s.eigenvalues[k]);
  }
  // Forming modes from the Gram matrix squares the conditioning; one
  // Gram-Schmidt sweep restores orthonormality without changing the span.
  for (Index k = 0; k < m; ++k) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < k; ++j) {
        basis.modes.col(k) -= basis.modes.col(j).dot(basis.modes.col(k)) * basis.modes.col(j);
      }
    }
    basis.modes.col(k).normalize();
  }
  return basis;
}

}  // namespace

PodBasis pod(const Mat& snapshots, Index m) {
  if (m < 1 || m > std::min(snapshots.rows(), snapshots.cols())) {
    throw InvalidArgument("pod: mode count " + std::to_string(m) + " outside [1, min(n, n_s)]");
  }
  const GramSpectrum s = gram_spectrum(snapshots);
  if (m > s.rank) {
    spdlog::warn("pod: requested {} modes but numerical rank is {}; using {}", m, s.rank, s.rank);
    m = s.rank;
  }
  return build_basis(snapshots, s, m);
}

PodBasis pod_energy(const Mat& snapshots, double energy_fraction) {
  if (!(energy_fraction > 0.0 && energy_fraction <= 1.0)) {
    throw InvalidArgument("pod: energy fraction must lie in (0, 1]");
  }
  const GramSpectrum s = gram_spectrum(snapshots);
  const double total = s.eigenvalues.sum();
  double captured = 0.0;
  Index m = 0;
  while (m < s.rank) {
    captured += s.eigenvalues[m++];
    if (captured >= energy_fraction * total) {
      break;
    }
  }
  return build_basis(snapshots, s, m);
}

namespace {

Index argmax_abs(const Vec& v) {
  Index best = 0;
  double best_value = std::abs(v[0]);
  for (Index i = 1; i < v.size(); ++i) {
    // Strict comparison keeps the smallest index on ties.
    if (std::abs(v[i]) > best_value) {
      best_value = std::abs(v[i]);
      best = i;
    }
  }
  return best;
}

}  // namespace

std::vector<Index> deim_indices(const Mat& basis) {
  const Index m = basis.cols();
  if (m < 1) {
    throw InvalidArgument("deim: basis needs at least one column");
  }
  if (m > basis.rows()) {
    throw InvalidArgument("deim: more columns than rows");
  }
  std::vector<Index> indices;
  indices.reserve(m);
  Vec residual = basis.col(0);
  for (Index k = 0; k < m; ++k) {
    if (k > 0) {
      Mat pt_basis(k, k);
      Vec pt_col(k);
      for (Index i = 0; i < k; ++i) {
        pt_basis.row(i) = basis.row(indices[i]).head(k);
        pt_col[i] = basis(indices[i], k);
      }
      const Vec w = pt_basis.partialPivLu().solve(pt_col);
      residual = basis.col(k) - basis.leftCols(k) * w;
    }
    const Index p = argmax_abs(residual);
    const double scale = basis.col(k).cwiseAbs().maxCoeff();
    if (!(std::abs(residual[p]) > 64.0 * std::numeric_limits<double>::epsilon() * scale)) {
      throw NumericalError("deim: P^T basis is singular at column " + std::to_string(k) +
                           " (degenerate basis)");
    }
    indices.push_back(p);
  }
  return indices;
}

DeimModel deim_select(const Mat& basis) {
  DeimModel model;
  model.basis = basis;
  model.indices = deim_indices(basis);
  const Index m = basis.cols();
  Mat pt_basis(m, m);
  for (Index i = 0; i < m; ++i) {
    pt_basis.row(i) = basis.row(model.indices[i]);
  }
  Eigen::JacobiSVD<Mat> svd(pt_basis);
  const Vec& sv = svd.singularValues();
  model.condition_number = sv[0] / sv[m - 1];
  if (model.condition_number > 1e8) {
    spdlog::warn("deim: P^T basis condition number {:.3e} exceeds 1e8", model.condition_number);
  } else {
    spdlog::debug("deim: {} points, P^T basis condition number {:.3e}", m, model.condition_number);
  }
  // projector = basis * (P^T basis)^-1, via (P^T basis)^T X^T = basis^T.
  model.projector = pt_basis.transpose().partialPivLu().solve(basis.transpose()).transpose();
  return model;
}

Vec DeimModel::sample(const Vec& f) const {
  if (f.size() != dimension()) {
    throw InvalidArgument("deim sample: dimension mismatch");
  }
  Vec s(size());
  for (Index i = 0; i < size(); ++i) {
    s[i] = f[indices[i]];
  }
  return s;
}

Vec DeimModel::apply(const Vec& sampled_values) const {
  if (sampled_values.size() != size()) {
    throw InvalidArgument("deim apply: expected " + std::to_string(size()) + " samples");
  }
  return projector * sampled_values;
}

Vec DeimModel::apply(std::span<const double> sampled_values) const {
  return apply(Vec(Eigen::Map<const Vec>(sampled_values.data(),
                                         static_cast<Index>(sampled_values.size()))));
}

}  // namespace glrom
