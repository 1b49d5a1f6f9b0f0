#pragma once

#include <span>
#include <vector>

#include "glrom/fem.hpp"
#include "glrom/grid.hpp"
#include "glrom/model.hpp"
#include "glrom/types.hpp"

namespace glrom {

/// Local snapshot space of one coarse neighborhood.
struct RegionSnapshots {
  int region = 0;
  std::vector<int> nodes;  // fine node ids, same order as Region::nodes
  Mat snapshots;           // nodes.size() x M_snap
  Index rank = 0;          // numerical column rank at 1e-10
};

/// Discrete harmonic extensions of delta boundary data, one per patch
/// boundary node off the domain boundary. `kappa_bar` is per triangle.
RegionSnapshots build_snapshots(const FineMesh& mesh, const Region& region,
                                std::span<const double> kappa_bar);

struct RegionEigenpairs {
  int region = 0;
  Vec eigenvalues;   // ascending, retained ones only
  Mat coefficients;  // M_snap x M_off, S^off-orthonormal
  Mat functions;     // local nodes x M_off, snapshots * coefficients
  bool regularized = false;
};

/// Smallest `offline_modes` eigenpairs of A^off v = lambda S^off v, where
/// A^off and S^off are the snapshot projections of the local stiffness
/// (weight kappa_bar) and weighted mass (weight kappa_tilde_bar).
RegionEigenpairs offline_eigenproblem(const FineMesh& mesh, const Region& region,
                                      const RegionSnapshots& snap,
                                      std::span<const double> kappa_bar,
                                      std::span<const double> kappa_tilde_bar, int offline_modes);

/// Bilinear coarse hat function of `region` at its fine nodes.
Vec partition_of_unity(const FineMesh& mesh, const CoarseGrid& grid, const Region& region);

/// Global offline basis Phi on the interior dofs.
struct MultiscaleSpace {
  SpMat basis;                     // N_f x N_c
  std::vector<int> column_region;  // owning coarse node per column
  std::vector<int> column_rank;    // eigenvalue rank within the region
  std::vector<Vec> eigenvalues;    // per region
  std::vector<int> offline_count;  // M_off per region

  Index fine_size() const { return basis.rows(); }
  Index coarse_size() const { return basis.cols(); }
};

/// Columns chi_i * phi_k for each region, restricted to interior dofs and
/// ordered by (region, eigenvalue rank). Each phi_k is scaled to unit max
/// norm with a positive largest entry before the multiplication.
MultiscaleSpace assemble_multiscale_basis(const FineMesh& mesh, const CoarseGrid& grid,
                                          const DofMap& dofs,
                                          std::span<const RegionEigenpairs> eigenpairs);

enum class MassWeight {
  KappaGradChi,  // kappa_bar * sum_j |grad chi_j|^2
  Kappa,         // kappa_bar alone
};

struct GmsfemOptions {
  int offline_modes = 3;
  MassWeight mass_weight = MassWeight::KappaGradChi;
};

/// Mean over `mu_values` of b(u_avg, mu), u_avg being the mean of the nodal
/// field over the region. On that region kappa_bar = kappa_q * this factor.
double region_parameter_average(const Region& region, const Vec& u_reference_nodal,
                                const Nonlinearity& b, std::span<const double> mu_values);

/// sum_j |grad chi_j|^2 per triangle for the P1 interpolants of the hats.
std::vector<double> partition_gradient_weight(const FineMesh& mesh, const CoarseGrid& grid);

/// Full offline construction: snapshots, eigenproblems and assembly.
MultiscaleSpace build_multiscale_space(const FineMesh& mesh, const CoarseGrid& grid,
                                       const DofMap& dofs, const PermeabilityField& kappa,
                                       const Nonlinearity& b, std::span<const double> mu_values,
                                       const Vec& u_reference_nodal, const GmsfemOptions& options);

}  // namespace glrom
