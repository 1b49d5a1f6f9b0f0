#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include "glrom/harness.hpp"

namespace glrom {

/// Experiment configuration as `key = value` lines; `#` starts a comment.
///
///   example         1..5, loads that example's defaults first
///   fine_cells      cells per axis of the fine mesh
///   coarse_cells    cells per axis of the coarse grid (divides fine_cells)
///   eta             channel conductivity contrast
///   rotated         true | false
///   permeability    CSV file with one value per fine triangle
///   nonlinearity    exp | exp_shifted
///   shift           shift of exp_shifted
///   mu_offline      list separated by commas or spaces
///   mu_online       value
///   source_offline  sin2pi | sin4pi | const:<c>     (also source_online)
///   u0_offline      w0 | w0:<scale> | zero          (also u0_online)
///   offline_modes   M_off per coarse neighborhood
///   pod_modes       N_r per offline mu
///   local_points    L0 local per coarse neighborhood
///   global_points   L0 global
///   dt, t_final, newton_tol, max_newton, steady_tol, stop_at_steady
///   seed, random_draws, random_mean, random_std
ExperimentSpec parse_config(std::istream& in);
ExperimentSpec load_config(const std::filesystem::path& path);

/// Inverse of parse_config; the output parses back to an equal spec.
std::string format_config(const ExperimentSpec& spec);

}  // namespace glrom
