#include <doctest.h>

#include <set>

#include "glrom/grid.hpp"

using namespace glrom;

TEST_CASE("single cell mesh") {
  const FineMesh mesh = build_fine_mesh(1, 1);
  CHECK(mesh.node_count() == 4);
  CHECK(mesh.triangle_count() == 2);
  CHECK(mesh.boundary_nodes.size() == 4);
}

TEST_CASE("default fine mesh counts") {
  const FineMesh mesh = build_fine_mesh(100, 100);
  CHECK(mesh.node_count() == 10201);
  CHECK(mesh.triangle_count() == 20000);
  CHECK(mesh.boundary_nodes.size() == 400);
}

TEST_CASE("rectangular mesh tiles the unit square") {
  const FineMesh mesh = build_fine_mesh(2, 3);
  CHECK(mesh.node_count() == 12);
  CHECK(mesh.triangle_count() == 12);
  double area = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    // shoelace formula on the raw coordinates
    const auto& tri = mesh.triangles[t];
    const Point a = mesh.nodes[tri[0]], b = mesh.nodes[tri[1]], c = mesh.nodes[tri[2]];
    const double shoelace = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    CHECK(shoelace > 0.0);
    CHECK(mesh.signed_area(t) == doctest::Approx(shoelace).epsilon(1e-14));
    area += shoelace;
  }
  CHECK(area == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mesh rejects empty cell counts") {
  CHECK_THROWS_AS(build_fine_mesh(0, 5), InvalidArgument);
  CHECK_THROWS_AS(build_fine_mesh(5, -1), InvalidArgument);
}

TEST_CASE("boundary flags match coordinates") {
  const FineMesh mesh = build_fine_mesh(7, 5);
  for (int i = 0; i < mesh.node_count(); ++i) {
    const Point p = mesh.nodes[i];
    const bool edge = p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
    CHECK(static_cast<bool>(mesh.on_boundary[i]) == edge);
  }
  CHECK(std::is_sorted(mesh.boundary_nodes.begin(), mesh.boundary_nodes.end()));
}

TEST_CASE("mesh construction is deterministic") {
  const FineMesh a = build_fine_mesh(9, 9);
  const FineMesh b = build_fine_mesh(9, 9);
  CHECK(a.triangles == b.triangles);
  for (int i = 0; i < a.node_count(); ++i) {
    CHECK(a.nodes[i].x == b.nodes[i].x);
    CHECK(a.nodes[i].y == b.nodes[i].y);
  }
}

TEST_CASE("interior coarse neighborhood covers two by two coarse cells") {
  const FineMesh mesh = build_fine_mesh(10, 10);
  const CoarseGrid grid = build_coarse_grid(mesh, 5, 5);
  const Region& r = grid.regions[grid.coarse_node(2, 2)];
  CHECK(r.cell_count == 4);
  CHECK(r.nodes.size() == 25);
  CHECK(r.triangles.size() == 32);
  CHECK(r.boundary_nodes.size() == 16);
}

TEST_CASE("default coarse grid") {
  const FineMesh mesh = build_fine_mesh(100, 100);
  const CoarseGrid grid = build_coarse_grid(mesh, 10, 10);
  CHECK(grid.node_count() == 121);
  CHECK(grid.ratio_x == 10);
  CHECK(grid.regions[grid.coarse_node(5, 5)].nodes.size() == 441);
  CHECK(grid.regions[grid.coarse_node(0, 0)].cell_count == 1);
  CHECK(grid.regions[grid.coarse_node(0, 4)].cell_count == 2);
  CHECK(grid.regions[grid.coarse_node(3, 7)].cell_count == 4);
}

TEST_CASE("coarse grid must divide the fine grid") {
  const FineMesh mesh = build_fine_mesh(10, 10);
  CHECK_THROWS_AS(build_coarse_grid(mesh, 3, 3), InvalidArgument);
  CHECK_THROWS_AS(build_coarse_grid(mesh, 0, 5), InvalidArgument);
}

TEST_CASE("neighborhood overlap counts") {
  const FineMesh mesh = build_fine_mesh(12, 12);
  const CoarseGrid grid = build_coarse_grid(mesh, 4, 4);
  std::vector<int> node_hits(mesh.node_count(), 0);
  std::vector<int> triangle_hits(mesh.triangle_count(), 0);
  for (const Region& r : grid.regions) {
    CHECK(std::is_sorted(r.nodes.begin(), r.nodes.end()));
    for (int n : r.nodes) {
      ++node_hits[n];
    }
    for (int t : r.triangles) {
      ++triangle_hits[t];
    }
  }
  // closed patches: a fine node on a coarse vertex lies in nine of them
  for (int h : node_hits) {
    CHECK(h >= 1);
    CHECK(h <= 9);
  }
  for (int h : triangle_hits) {
    CHECK(h >= 1);
    CHECK(h <= 4);
  }
}

TEST_CASE("nearest coarse node") {
  const FineMesh mesh = build_fine_mesh(10, 10);
  const CoarseGrid grid = build_coarse_grid(mesh, 5, 5);
  const std::vector<int> nearest = nearest_coarse_node(mesh, grid);
  CHECK(nearest[mesh.node(0, 0)] == grid.coarse_node(0, 0));
  CHECK(nearest[mesh.node(4, 6)] == grid.coarse_node(2, 3));
  // (1, 0) is equidistant from coarse nodes 0 and 1
  CHECK(nearest[mesh.node(1, 0)] == grid.coarse_node(0, 0));
  std::set<int> used(nearest.begin(), nearest.end());
  CHECK(used.size() == 36);
}
