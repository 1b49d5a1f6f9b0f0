#pragma once

#include <cmath>
#include <random>

#include "glrom/fom.hpp"
#include "glrom/grid.hpp"
#include "glrom/model.hpp"

namespace glrom::test {

inline Mat random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      m(i, j) = n(rng);
    }
  }
  return m;
}

inline Vec random_vector(Index size, std::mt19937_64& rng) { return random_matrix(size, 1, rng); }

inline double rel_diff(const Vec& a, const Vec& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline double rel_diff(const Mat& a, const Mat& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline FineModel channel_model(int cells, double eta = 1e6,
                               Nonlinearity b = Nonlinearity::exp_mu_u()) {
  FineMesh mesh = build_fine_mesh(cells, cells);
  PermeabilityField kappa = channel_permeability(mesh, eta, ChannelLayout::standard());
  return FineModel(std::move(mesh), std::move(kappa), b);
}

// Unit-weight P1 block of triangle t from the inverse Jacobian of the
// affine map, independent of the library's element code.
inline Eigen::Matrix3d local_block(const FineMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Point p0 = mesh.nodes[tri[0]], p1 = mesh.nodes[tri[1]], p2 = mesh.nodes[tri[2]];
  Eigen::Matrix2d jac;
  jac << p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y;
  const double area = 0.5 * std::abs(jac.determinant());
  Eigen::Matrix<double, 2, 3> ref;
  ref << -1, 1, 0, -1, 0, 1;
  const Eigen::Matrix<double, 2, 3> grad = jac.inverse().transpose() * ref;
  return area * grad.transpose() * grad;
}

inline Mat dense_stiffness(const FineMesh& mesh, const std::vector<double>& weight) {
  Mat a = Mat::Zero(mesh.node_count(), mesh.node_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Eigen::Matrix3d k = weight[t] * local_block(mesh, t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        a(tri[i], tri[j]) += k(i, j);
      }
    }
  }
  return a;
}

// sum_T kappa_T bbar_T K_T U on the interior dofs, element by element.
inline Vec dense_F(const FineModel& model, const Vec& u, double mu) {
  const FineMesh& mesh = model.mesh();
  const Vec un = model.dofs().extend(u);
  Vec f = Vec::Zero(mesh.node_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    double bbar = 0.0;
    Eigen::Vector3d ut;
    for (int i = 0; i < 3; ++i) {
      bbar += std::exp(mu * (model.nonlinearity().shift + un[tri[i]])) / 3.0;
      ut[i] = un[tri[i]];
    }
    const Eigen::Vector3d ft = model.permeability().values[t] * bbar * local_block(mesh, t) * ut;
    for (int i = 0; i < 3; ++i) {
      f[tri[i]] += ft[i];
    }
  }
  return model.dofs().restrict(f);
}

}  // namespace glrom::test

#include "glrom/gmsfem.hpp"

namespace glrom::test {

inline SpMat identity_basis(Index n) {
  SpMat id(n, n);
  id.setIdentity();
  return id;
}

// GMsFEM space for a channel model, built from w0 of the sin 2 pi source.
inline MultiscaleSpace small_space(const FineModel& model, int coarse_cells, int offline_modes,
                                   double mu = 10.0) {
  const CoarseGrid grid = build_coarse_grid(model.mesh(), coarse_cells, coarse_cells);
  GmsfemOptions options;
  options.offline_modes = offline_modes;
  const std::vector<double> mus{mu};
  return build_multiscale_space(model.mesh(), grid, model.dofs(), model.permeability(),
                                model.nonlinearity(), mus,
                                model.dofs().extend(model.w0(Source::sin2pi())), options);
}

}  // namespace glrom::test
