#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "glrom/grid.hpp"
#include "glrom/model.hpp"
#include "glrom/types.hpp"

namespace glrom {

/// Map between mesh nodes and the unknowns left after eliminating
/// homogeneous Dirichlet nodes.
struct DofMap {
  std::vector<int> dof_to_node;  // ascending node ids
  std::vector<int> node_to_dof;  // -1 for eliminated nodes

  int size() const { return static_cast<int>(dof_to_node.size()); }
  Vec extend(const Vec& dofs) const;    // zero on eliminated nodes
  Vec restrict(const Vec& nodal) const;
};

DofMap make_dof_map(int node_count, std::span<const int> eliminated);

/// Gradients of the three P1 vertex functions of triangle t.
std::array<Point, 3> p1_gradients(const FineMesh& mesh, int t);

/// P1 stiffness with a per-triangle constant weight, over all triangles.
SpMat assemble_stiffness(const FineMesh& mesh, std::span<const double> weight);

/// Same, integrating only over the listed triangles.
SpMat assemble_stiffness(const FineMesh& mesh, std::span<const double> weight,
                         std::span<const int> triangles);

/// Consistent P1 mass matrix.
SpMat assemble_mass(const FineMesh& mesh);

/// Weighted consistent mass over the listed triangles.
SpMat assemble_mass(const FineMesh& mesh, std::span<const double> weight,
                    std::span<const int> triangles);

using SourceFunction = std::function<double(Point)>;

/// Load vector with edge-midpoint quadrature.
Vec assemble_load(const FineMesh& mesh, const SourceFunction& h);

struct DirichletSystem {
  SpMat matrix;
  Vec rhs;
  DofMap dofs;
};

/// Eliminates the listed nodes with homogeneous values.
DirichletSystem apply_dirichlet(const SpMat& op, const Vec& rhs, std::span<const int> boundary);

/// Restriction P op P^T onto the dofs of `map`.
SpMat restrict_operator(const SpMat& op, const DofMap& map);

/// Maximum absolute row sum.
double infinity_norm(const SpMat& op);

/// rhs - op * x with long double accumulation.
Vec extended_residual(const SpMat& op, const Vec& x, const Vec& rhs);

/// Per-triangle P1 stiffness blocks K_T (weight kappa_T) on the interior
/// dofs, for operators with a nonlinear triangle factor:
///   F(U) = sum_T bbar_T K_T U,  bbar_T = mean of the nodal b-values of T.
/// Eliminated vertices carry U = 0 and the supplied boundary b-value.
class ElementStiffness {
 public:
  struct Element {
    std::array<Index, 3> dof;  // -1 for eliminated vertices
    std::array<std::array<double, 3>, 3> block;
  };

  ElementStiffness() = default;
  ElementStiffness(const FineMesh& mesh, std::span<const double> weight, const DofMap& dofs);

  Index size() const { return size_; }
  const std::vector<Element>& elements() const { return elements_; }
  /// Elements with dof `i` as a vertex.
  const std::vector<int>& incident(Index i) const { return incident_[i]; }

  /// F(U) for nodal b-values `b` on the dofs.
  Vec apply(const Vec& u, const Vec& b, double b_boundary) const;
  /// sum_T bbar_T K_T.
  SpMat weighted(const Vec& b, double b_boundary) const;
  /// dF/dU given nodal b and db/du on the dofs.
  SpMat jacobian(const Vec& u, const Vec& b, const Vec& db, double b_boundary) const;

 private:
  double mean_b(const Element& e, const Vec& b, double b_boundary) const;

  Index size_ = 0;
  std::vector<Element> elements_;
  std::vector<std::vector<int>> incident_;
};

/// Solves -div(kappa grad w0) = h with w0 = 0 on the boundary; returns the
/// interior-dof vector. Throws unless the normwise backward error
/// ||h - A w0|| / (||A|| ||w0|| + ||h||) is at most 1e-10.
Vec solve_elliptic_w0(const FineMesh& mesh, const PermeabilityField& kappa,
                      const SourceFunction& h);

}  // namespace glrom
