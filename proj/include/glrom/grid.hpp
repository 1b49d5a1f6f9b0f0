#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "glrom/types.hpp"

namespace glrom {

/// Structured triangulation of the unit square.
///
/// Nodes are numbered row-major, x fastest: node(i, j) = j * (nx + 1) + i.
/// Each square cell (i, j) is split along its bottom-left to top-right
/// diagonal into triangles 2 * (j * nx + i) and 2 * (j * nx + i) + 1, both
/// counter-clockwise.
struct FineMesh {
  int nx = 0;
  int ny = 0;
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> boundary_nodes;  // sorted
  std::vector<char> on_boundary;    // per node

  int node(int i, int j) const { return j * (nx + 1) + i; }
  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  double signed_area(int t) const;
  Point centroid(int t) const;
};

FineMesh build_fine_mesh(int nx, int ny);

/// Neighborhood of one coarse vertex: the union of the coarse cells touching
/// it, expressed in fine-mesh entities. Node lists are sorted ascending.
struct Region {
  int coarse_node = 0;
  int i0 = 0, i1 = 0, j0 = 0, j1 = 0;  // fine node index box, inclusive
  int cell_count = 0;                  // coarse cells in the patch (1, 2 or 4)
  std::vector<int> nodes;
  std::vector<int> triangles;
  std::vector<int> boundary_nodes;  // nodes on the patch boundary
};

struct CoarseGrid {
  int nx = 0;  // coarse cells per axis
  int ny = 0;
  int ratio_x = 0;  // fine cells per coarse cell
  int ratio_y = 0;
  std::vector<Point> coarse_nodes;
  std::vector<Region> regions;  // one per coarse node

  int coarse_node(int i, int j) const { return j * (nx + 1) + i; }
  int node_count() const { return static_cast<int>(coarse_nodes.size()); }
};

CoarseGrid build_coarse_grid(const FineMesh& mesh, int nx, int ny);

/// Coarse node closest to each fine node; ties go to the smallest id.
std::vector<int> nearest_coarse_node(const FineMesh& mesh, const CoarseGrid& grid);

/// Debug dump: nodes.csv and triangles.csv in `dir`.
void write_mesh_csv(const FineMesh& mesh, const std::filesystem::path& dir);

}  // namespace glrom
