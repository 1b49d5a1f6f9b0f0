#include "glrom/gmsfem.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/SparseCholesky>
#include <spdlog/spdlog.h>

namespace glrom {

namespace {

// Global node id -> position in region.nodes, or -1.
class LocalNumbering {
 public:
  LocalNumbering(const FineMesh& mesh, const Region& region)
      : mesh_(mesh), region_(region), width_(region.i1 - region.i0 + 1) {}

  int operator()(int node) const {
    const int i = node % (mesh_.nx + 1);
    const int j = node / (mesh_.nx + 1);
    if (i < region_.i0 || i > region_.i1 || j < region_.j0 || j > region_.j1) {
      return -1;
    }
    return (j - region_.j0) * width_ + (i - region_.i0);
  }

 private:
  const FineMesh& mesh_;
  const Region& region_;
  int width_;
};

// Stiffness or weighted mass on the region, in local numbering.
Mat local_operator(const FineMesh& mesh, const Region& region, std::span<const double> weight,
                   bool mass) {
  const SpMat global = mass ? assemble_mass(mesh, weight, region.triangles)
                            : assemble_stiffness(mesh, weight, region.triangles);
  const LocalNumbering local(mesh, region);
  const Index n = static_cast<Index>(region.nodes.size());
  Mat op = Mat::Zero(n, n);
  for (int node : region.nodes) {
    for (SpMat::InnerIterator it(global, node); it; ++it) {
      op(local(static_cast<int>(it.row())), local(node)) += it.value();
    }
  }
  return op;
}

SpMat local_sparse(const FineMesh& mesh, const Region& region, std::span<const double> weight) {
  const SpMat global = assemble_stiffness(mesh, weight, region.triangles);
  const LocalNumbering local(mesh, region);
  std::vector<Triplet> trips;
  for (int node : region.nodes) {
    for (SpMat::InnerIterator it(global, node); it; ++it) {
      trips.emplace_back(local(static_cast<int>(it.row())), local(node), it.value());
    }
  }
  const Index n = static_cast<Index>(region.nodes.size());
  SpMat op(n, n);
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

}  // namespace

RegionSnapshots build_snapshots(const FineMesh& mesh, const Region& region,
                                std::span<const double> kappa_bar) {
  if (region.nodes.empty()) {
    throw InvalidArgument("build_snapshots: empty region");
  }
  const LocalNumbering local(mesh, region);
  const Index n = static_cast<Index>(region.nodes.size());

  std::vector<char> on_patch_boundary(n, 0);
  for (int node : region.boundary_nodes) {
    on_patch_boundary[local(node)] = 1;
  }
  std::vector<Index> inner;
  std::vector<Index> sources;  // local ids carrying delta data
  for (Index k = 0; k < n; ++k) {
    const int node = region.nodes[k];
    if (!on_patch_boundary[k]) {
      inner.push_back(k);
    } else if (!mesh.on_boundary[node]) {
      sources.push_back(k);
    }
  }
  if (sources.empty()) {
    throw InvalidArgument("build_snapshots: region has no boundary data off the domain boundary");
  }

  RegionSnapshots out;
  out.region = region.coarse_node;
  out.nodes = region.nodes;
  out.snapshots = Mat::Zero(n, static_cast<Index>(sources.size()));
  for (size_t s = 0; s < sources.size(); ++s) {
    out.snapshots(sources[s], static_cast<Index>(s)) = 1.0;
  }

  if (!inner.empty()) {
    const SpMat stiffness = local_sparse(mesh, region, kappa_bar);
    std::vector<int> inner_pos(n, -1);
    for (size_t k = 0; k < inner.size(); ++k) {
      inner_pos[inner[k]] = static_cast<int>(k);
    }
    std::vector<Triplet> trips;
    const Index ni = static_cast<Index>(inner.size());
    Mat rhs = Mat::Zero(ni, static_cast<Index>(sources.size()));
    std::vector<int> source_pos(n, -1);
    for (size_t s = 0; s < sources.size(); ++s) {
      source_pos[sources[s]] = static_cast<int>(s);
    }
    for (Index col = 0; col < n; ++col) {
      for (SpMat::InnerIterator it(stiffness, col); it; ++it) {
        const int r = inner_pos[it.row()];
        if (r < 0) {
          continue;
        }
        if (inner_pos[col] >= 0) {
          trips.emplace_back(r, inner_pos[col], it.value());
        } else if (source_pos[col] >= 0) {
          rhs(r, source_pos[col]) -= it.value();
        }
      }
    }
    SpMat inner_op(ni, ni);
    inner_op.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<SpMat> solver(inner_op);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("build_snapshots: singular local system in region " +
                           std::to_string(region.coarse_node));
    }
    const Mat values = solver.solve(rhs);
    for (Index k = 0; k < ni; ++k) {
      out.snapshots.row(inner[k]) = values.row(k);
    }
  }

  Eigen::ColPivHouseholderQR<Mat> qr(out.snapshots);
  qr.setThreshold(1e-10);
  out.rank = qr.rank();
  if (out.rank < out.snapshots.cols()) {
    spdlog::warn("region {}: snapshot rank {} below count {}", region.coarse_node, out.rank,
                 out.snapshots.cols());
  }
  return out;
}

RegionEigenpairs offline_eigenproblem(const FineMesh& mesh, const Region& region,
                                      const RegionSnapshots& snap,
                                      std::span<const double> kappa_bar,
                                      std::span<const double> kappa_tilde_bar, int offline_modes) {
  if (offline_modes < 1) {
    throw InvalidArgument("offline_eigenproblem: need at least one mode");
  }
  const Mat& phi = snap.snapshots;
  const Mat a_off = phi.transpose() * local_operator(mesh, region, kappa_bar, false) * phi;
  Mat s_off = phi.transpose() * local_operator(mesh, region, kappa_tilde_bar, true) * phi;
  // Symmetrize away round-off before the pencil solve.
  const Mat a_sym = 0.5 * (a_off + a_off.transpose());
  s_off = 0.5 * (s_off + s_off.transpose());

  RegionEigenpairs out;
  out.region = region.coarse_node;
  if (Eigen::LLT<Mat>(s_off).info() != Eigen::Success) {
    const double shift = 1e-12 * s_off.trace();
    s_off.diagonal().array() += shift;
    out.regularized = true;
    spdlog::warn("region {}: S^off singular, shifted by {:.3e}", region.coarse_node, shift);
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> eig(a_sym, s_off);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("offline_eigenproblem: pencil solve failed in region " +
                         std::to_string(region.coarse_node));
  }
  Index keep = offline_modes;
  if (keep > phi.cols()) {
    spdlog::warn("region {}: only {} snapshots for {} offline modes", region.coarse_node,
                 phi.cols(), offline_modes);
    keep = phi.cols();
  }
  out.eigenvalues = eig.eigenvalues().head(keep);
  out.coefficients = eig.eigenvectors().leftCols(keep);
  out.functions = phi * out.coefficients;
  return out;
}

Vec partition_of_unity(const FineMesh& mesh, const CoarseGrid& grid, const Region& region) {
  const int I = region.coarse_node % (grid.nx + 1);
  const int J = region.coarse_node / (grid.nx + 1);
  Vec chi(static_cast<Index>(region.nodes.size()));
  for (size_t k = 0; k < region.nodes.size(); ++k) {
    const int node = region.nodes[k];
    const int i = node % (mesh.nx + 1);
    const int j = node / (mesh.nx + 1);
    const double hx = 1.0 - std::abs(i - I * grid.ratio_x) / static_cast<double>(grid.ratio_x);
    const double hy = 1.0 - std::abs(j - J * grid.ratio_y) / static_cast<double>(grid.ratio_y);
    chi[static_cast<Index>(k)] = std::max(hx, 0.0) * std::max(hy, 0.0);
  }
  return chi;
}

MultiscaleSpace assemble_multiscale_basis(const FineMesh& mesh, const CoarseGrid& grid,
                                          const DofMap& dofs,
                                          std::span<const RegionEigenpairs> eigenpairs) {
  if (static_cast<int>(eigenpairs.size()) != grid.node_count()) {
    throw InvalidArgument("assemble_multiscale_basis: need eigenpairs for every coarse node");
  }
  MultiscaleSpace space;
  std::vector<Triplet> trips;
  Index column = 0;
  for (const RegionEigenpairs& pairs : eigenpairs) {
    const Region& region = grid.regions[pairs.region];
    const Vec chi = partition_of_unity(mesh, grid, region);
    space.eigenvalues.push_back(pairs.eigenvalues);
    space.offline_count.push_back(static_cast<int>(pairs.functions.cols()));
    for (Index k = 0; k < pairs.functions.cols(); ++k) {
      Vec phi = pairs.functions.col(k);
      Index peak = 0;
      for (Index r = 1; r < phi.size(); ++r) {
        if (std::abs(phi[r]) > std::abs(phi[peak])) {
          peak = r;
        }
      }
      if (phi[peak] == 0.0) {
        throw NumericalError("assemble_multiscale_basis: zero offline function");
      }
      phi /= phi[peak];
      bool nonzero = false;
      for (Index r = 0; r < phi.size(); ++r) {
        const int dof = dofs.node_to_dof[region.nodes[r]];
        const double v = chi[r] * phi[r];
        if (dof >= 0 && v != 0.0) {
          trips.emplace_back(dof, column, v);
          nonzero = true;
        }
      }
      if (!nonzero) {
        throw NumericalError("assemble_multiscale_basis: column " + std::to_string(column) +
                             " vanishes after partition-of-unity multiplication");
      }
      space.column_region.push_back(pairs.region);
      space.column_rank.push_back(static_cast<int>(k));
      ++column;
    }
  }
  space.basis.resize(dofs.size(), column);
  space.basis.setFromTriplets(trips.begin(), trips.end());
  return space;
}

double region_parameter_average(const Region& region, const Vec& u_reference_nodal,
                                const Nonlinearity& b, std::span<const double> mu_values) {
  if (mu_values.empty()) {
    throw InvalidArgument("region_parameter_average: no mu values");
  }
  double u_avg = 0.0;
  for (int node : region.nodes) {
    u_avg += u_reference_nodal[node];
  }
  u_avg /= static_cast<double>(region.nodes.size());
  double factor = 0.0;
  for (double mu : mu_values) {
    factor += b.value(u_avg, mu);
  }
  return factor / static_cast<double>(mu_values.size());
}

std::vector<double> partition_gradient_weight(const FineMesh& mesh, const CoarseGrid& grid) {
  std::vector<double> weight(mesh.triangle_count(), 0.0);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto grads = p1_gradients(mesh, t);
    // The triangle lies in one coarse cell; only its four corner hats are nonzero.
    const int cell_i = (tri[0] % (mesh.nx + 1)) / grid.ratio_x;
    const int cell_j = (tri[0] / (mesh.nx + 1)) / grid.ratio_y;
    for (int dj = 0; dj <= 1; ++dj) {
      for (int di = 0; di <= 1; ++di) {
        const int I = cell_i + di, J = cell_j + dj;
        Point g;
        for (int a = 0; a < 3; ++a) {
          const int i = tri[a] % (mesh.nx + 1);
          const int j = tri[a] / (mesh.nx + 1);
          const double hx = 1.0 - std::abs(i - I * grid.ratio_x) / double(grid.ratio_x);
          const double hy = 1.0 - std::abs(j - J * grid.ratio_y) / double(grid.ratio_y);
          const double chi = std::max(hx, 0.0) * std::max(hy, 0.0);
          g.x += chi * grads[a].x;
          g.y += chi * grads[a].y;
        }
        weight[t] += g.x * g.x + g.y * g.y;
      }
    }
  }
  return weight;
}

MultiscaleSpace build_multiscale_space(const FineMesh& mesh, const CoarseGrid& grid,
                                       const DofMap& dofs, const PermeabilityField& kappa,
                                       const Nonlinearity& b, std::span<const double> mu_values,
                                       const Vec& u_reference_nodal, const GmsfemOptions& options) {
  const std::vector<double> grad_chi = partition_gradient_weight(mesh, grid);
  std::vector<double> kappa_bar(kappa.values);
  std::vector<double> kappa_tilde(kappa.values.size());
  std::vector<RegionEigenpairs> pairs;
  pairs.reserve(grid.regions.size());
  for (const Region& region : grid.regions) {
    const double factor = region_parameter_average(region, u_reference_nodal, b, mu_values);
    for (int t : region.triangles) {
      kappa_bar[t] = kappa.values[t] * factor;
      kappa_tilde[t] = options.mass_weight == MassWeight::KappaGradChi
                           ? kappa_bar[t] * grad_chi[t]
                           : kappa_bar[t];
    }
    const RegionSnapshots snap = build_snapshots(mesh, region, kappa_bar);
    pairs.push_back(
        offline_eigenproblem(mesh, region, snap, kappa_bar, kappa_tilde, options.offline_modes));
  }
  return assemble_multiscale_basis(mesh, grid, dofs, pairs);
}

}  // namespace glrom
