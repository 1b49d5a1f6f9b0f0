#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "glrom/coarse.hpp"
#include "glrom/fom.hpp"
#include "glrom/reduction.hpp"

namespace glrom {

/// Evaluates selected rows of the nonlinear remainder
/// N(V alpha) = F(V alpha) - b(0, mu) A_q V alpha, touching only the elements
/// incident to each row and their vertices.
class RowEvaluator {
 public:
  RowEvaluator() = default;
  RowEvaluator(const ElementStiffness& elements, const Mat& reduced_to_fine,
               std::span<const Index> rows);

  Index size() const { return static_cast<Index>(rows_.size()); }
  Index stencil_size() const;

  /// Row values, and when `jacobian` is non-null the rows of dN/dalpha.
  void evaluate(const Vec& alpha, double mu, const Nonlinearity& b, Vec& values,
                Mat* jacobian) const;

  /// True if b's exponent exceeds its bound at any stencil node.
  bool exceeds(const Vec& alpha, double mu, const Nonlinearity& b) const;

 private:
  struct Local {
    std::array<int, 3> vertex;  // stencil position, -1 on the boundary
    std::array<double, 3> coefficient;  // K_T row of the evaluated dof
  };
  struct Row {
    Index dof = 0;
    std::vector<Local> elements;
    Mat basis_rows;  // stencil x N_r rows of V
  };
  std::vector<Row> rows_;
};

/// Online reduced model of dimension N_r:
///   F^(alpha) = b(0, mu) K^ alpha + C N(V alpha)[P]
/// with the linear part exact and global DEIM on the remainder N.
struct RomSystem {
  PodBasis pod_basis;       // Psi: N_c x N_r
  Mat reduced_to_fine;      // V = Phi Psi: N_f x N_r
  Mat mass;                 // M^ = V^T M V
  Mat stiffness;            // K^ = V^T A_q V
  Eigen::LLT<Mat> mass_factor;
  DeimModel global_deim;    // on N snapshots, fine dimension
  Mat closure;              // C = V^T Psi* (P^T Psi*)^-1: N_r x L
  RowEvaluator rows;
  Nonlinearity nonlinearity;

  Index size() const { return reduced_to_fine.cols(); }
  Index points() const { return global_deim.size(); }
};

/// `snapshots` are coarse states (N_c x n_s) and `f_snapshots` the matching
/// N(Phi z) columns; runs at several mu are concatenated beforehand.
RomSystem build_rom(const Mat& snapshots, const Mat& f_snapshots, Index reduced_size,
                    Index global_points, const SpMat& basis, const FineModel& fine);

/// Instrumentation for the online stage.
struct RomStats {
  std::uint64_t row_gathers = 0;       // rows of F evaluated
  std::uint64_t newton_iterations = 0; // Jacobian solves
  std::vector<std::uint64_t> gathers_per_iteration;
};

/// V^T H for a fine load vector.
Vec rom_load(const RomSystem& rom, const Vec& fine_load);

/// M^-weighted projection of a fine state: M^-1 V^T M u.
Vec rom_project(const RomSystem& rom, const FineModel& fine, const Vec& u);

/// F^ = b(0, mu) K^ alpha + C * (sampled rows of N(V alpha)).
Vec rom_F_hat(const RomSystem& rom, const Vec& alpha, double mu, RomStats* stats = nullptr);

Trajectory solve_rom(const RomSystem& rom, double mu, const Vec& reduced_load, const Vec& alpha0,
                     const TimeSteppingConfig& config, RomStats* stats = nullptr);

/// U~ = Phi Psi alpha.
Vec downscale(const RomSystem& rom, const Vec& alpha);

}  // namespace glrom
