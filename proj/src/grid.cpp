#include "glrom/grid.hpp"

#include <algorithm>
#include <fstream>

namespace glrom {

double FineMesh::signed_area(int t) const {
  const auto& tri = triangles[t];
  const Point& a = nodes[tri[0]];
  const Point& b = nodes[tri[1]];
  const Point& c = nodes[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Point FineMesh::centroid(int t) const {
  const auto& tri = triangles[t];
  Point p;
  for (int k : tri) {
    p.x += nodes[k].x;
    p.y += nodes[k].y;
  }
  p.x /= 3.0;
  p.y /= 3.0;
  return p;
}

FineMesh build_fine_mesh(int nx, int ny) {
  if (nx < 1 || ny < 1) {
    throw InvalidArgument("fine mesh needs at least one cell per axis");
  }
  FineMesh mesh;
  mesh.nx = nx;
  mesh.ny = ny;
  mesh.nodes.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  mesh.on_boundary.assign(static_cast<size_t>(nx + 1) * (ny + 1), 0);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Exact endpoints so boundary coordinates are exactly 0 or 1.
      const double x = i == nx ? 1.0 : static_cast<double>(i) / nx;
      const double y = j == ny ? 1.0 : static_cast<double>(j) / ny;
      mesh.nodes.push_back({x, y});
      if (i == 0 || i == nx || j == 0 || j == ny) {
        const int id = mesh.node(i, j);
        mesh.on_boundary[id] = 1;
        mesh.boundary_nodes.push_back(id);
      }
    }
  }
  mesh.triangles.reserve(2 * static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int n00 = mesh.node(i, j);
      const int n10 = mesh.node(i + 1, j);
      const int n01 = mesh.node(i, j + 1);
      const int n11 = mesh.node(i + 1, j + 1);
      mesh.triangles.push_back({n00, n10, n11});
      mesh.triangles.push_back({n00, n11, n01});
    }
  }
  return mesh;
}

CoarseGrid build_coarse_grid(const FineMesh& mesh, int nx, int ny) {
  if (nx < 1 || ny < 1) {
    throw InvalidArgument("coarse grid needs at least one cell per axis");
  }
  if (mesh.nx % nx != 0 || mesh.ny % ny != 0) {
    throw InvalidArgument("coarse cell counts must divide the fine cell counts");
  }
  CoarseGrid grid;
  grid.nx = nx;
  grid.ny = ny;
  grid.ratio_x = mesh.nx / nx;
  grid.ratio_y = mesh.ny / ny;
  for (int J = 0; J <= ny; ++J) {
    for (int I = 0; I <= nx; ++I) {
      grid.coarse_nodes.push_back(mesh.nodes[mesh.node(I * grid.ratio_x, J * grid.ratio_y)]);

      Region r;
      r.coarse_node = grid.coarse_node(I, J);
      const int ci0 = std::max(I - 1, 0), ci1 = std::min(I, nx - 1);
      const int cj0 = std::max(J - 1, 0), cj1 = std::min(J, ny - 1);
      r.cell_count = (ci1 - ci0 + 1) * (cj1 - cj0 + 1);
      r.i0 = ci0 * grid.ratio_x;
      r.i1 = (ci1 + 1) * grid.ratio_x;
      r.j0 = cj0 * grid.ratio_y;
      r.j1 = (cj1 + 1) * grid.ratio_y;
      for (int j = r.j0; j <= r.j1; ++j) {
        for (int i = r.i0; i <= r.i1; ++i) {
          const int id = mesh.node(i, j);
          r.nodes.push_back(id);
          if (i == r.i0 || i == r.i1 || j == r.j0 || j == r.j1) {
            r.boundary_nodes.push_back(id);
          }
        }
      }
      for (int j = r.j0; j < r.j1; ++j) {
        for (int i = r.i0; i < r.i1; ++i) {
          const int cell = j * mesh.nx + i;
          r.triangles.push_back(2 * cell);
          r.triangles.push_back(2 * cell + 1);
        }
      }
      grid.regions.push_back(std::move(r));
    }
  }
  return grid;
}

namespace {

// Nearest multiple of `ratio` to `i`, rounding exact halves down.
int nearest_coarse_index(int i, int ratio) {
  const int lower = i / ratio;
  const int offset = i - lower * ratio;
  return 2 * offset > ratio ? lower + 1 : lower;
}

}  // namespace

std::vector<int> nearest_coarse_node(const FineMesh& mesh, const CoarseGrid& grid) {
  std::vector<int> owner(mesh.node_count());
  for (int j = 0; j <= mesh.ny; ++j) {
    const int J = nearest_coarse_index(j, grid.ratio_y);
    for (int i = 0; i <= mesh.nx; ++i) {
      owner[mesh.node(i, j)] = grid.coarse_node(nearest_coarse_index(i, grid.ratio_x), J);
    }
  }
  return owner;
}

void write_mesh_csv(const FineMesh& mesh, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream nodes(dir / "nodes.csv");
  nodes.precision(17);
  nodes << "id,x,y,boundary\n";
  for (int k = 0; k < mesh.node_count(); ++k) {
    nodes << k << ',' << mesh.nodes[k].x << ',' << mesh.nodes[k].y << ','
          << int(mesh.on_boundary[k]) << '\n';
  }
  std::ofstream tris(dir / "triangles.csv");
  tris << "id,n0,n1,n2\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    tris << t << ',' << tri[0] << ',' << tri[1] << ',' << tri[2] << '\n';
  }
}

}  // namespace glrom
