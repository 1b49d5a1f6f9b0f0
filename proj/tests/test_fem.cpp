#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "glrom/fem.hpp"
#include "support.hpp"

using namespace glrom;
using namespace glrom::test;

namespace {

Vec nodal(const FineMesh& mesh, double (*f)(Point)) {
  Vec v(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i) {
    v[i] = f(mesh.nodes[i]);
  }
  return v;
}

}  // namespace

TEST_CASE("single cell stiffness has zero row sums") {
  const FineMesh mesh = build_fine_mesh(1, 1);
  const SpMat a = assemble_stiffness(mesh, std::vector<double>(2, 1.0));
  CHECK(a.rows() == 4);
  const Mat dense = a;
  for (Index i = 0; i < 4; ++i) {
    CHECK(std::abs(dense.row(i).sum()) < 1e-15);
  }
  CHECK(rel_diff(dense, dense_stiffness(mesh, {1.0, 1.0})) < 1e-14);
}

TEST_CASE("stiffness energy of the linear field x is one") {
  const FineMesh mesh = build_fine_mesh(8, 5);
  const std::vector<double> ones(mesh.triangle_count(), 1.0);
  const SpMat a = assemble_stiffness(mesh, ones);
  const Vec x = nodal(mesh, [](Point p) { return p.x; });
  CHECK(x.dot(a * x) == doctest::Approx(1.0).epsilon(1e-13));
  const SpMat scaled = assemble_stiffness(mesh, std::vector<double>(mesh.triangle_count(), 7.0));
  CHECK(x.dot(scaled * x) == doctest::Approx(7.0).epsilon(1e-13));
}

TEST_CASE("stiffness matches the dense oracle and is linear in the weight") {
  std::mt19937_64 rng(3);
  const FineMesh mesh = build_fine_mesh(6, 6);
  std::uniform_real_distribution<double> pos(0.5, 5.0);
  std::vector<double> w1(mesh.triangle_count()), w2(mesh.triangle_count()), sum(w1.size());
  for (size_t t = 0; t < w1.size(); ++t) {
    w1[t] = pos(rng);
    w2[t] = pos(rng);
    sum[t] = 2.0 * w1[t] + 3.0 * w2[t];
  }
  const Mat a1 = assemble_stiffness(mesh, w1);
  const Mat a2 = assemble_stiffness(mesh, w2);
  const Mat as = assemble_stiffness(mesh, sum);
  CHECK(rel_diff(a1, dense_stiffness(mesh, w1)) < 1e-13);
  CHECK(rel_diff(as, Mat(2.0 * a1 + 3.0 * a2)) < 1e-13);
  CHECK(rel_diff(a1, Mat(a1.transpose())) == 0.0);
  for (Index i = 0; i < a1.rows(); ++i) {
    CHECK(std::abs(a1.row(i).sum()) < 1e-12);
  }
}

TEST_CASE("stiffness over a triangle partition sums to the global matrix") {
  const FineMesh mesh = build_fine_mesh(6, 6);
  const std::vector<double> w(mesh.triangle_count(), 2.5);
  std::vector<int> even, odd;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    (t % 2 == 0 ? even : odd).push_back(t);
  }
  const Mat total = assemble_stiffness(mesh, w);
  const Mat parts = Mat(assemble_stiffness(mesh, w, even)) + Mat(assemble_stiffness(mesh, w, odd));
  CHECK(rel_diff(total, parts) < 1e-14);
}

TEST_CASE("stiffness rejects nonpositive weights") {
  const FineMesh mesh = build_fine_mesh(2, 2);
  std::vector<double> w(mesh.triangle_count(), 1.0);
  w[3] = 0.0;
  CHECK_THROWS_AS(assemble_stiffness(mesh, w), InvalidArgument);
  CHECK_THROWS_AS(assemble_stiffness(mesh, std::vector<double>(3, 1.0)), InvalidArgument);
}

TEST_CASE("mass matrix integrates the unit square") {
  const FineMesh mesh = build_fine_mesh(7, 4);
  const SpMat m = assemble_mass(mesh);
  const Vec one = Vec::Ones(mesh.node_count());
  CHECK(one.dot(m * one) == doctest::Approx(1.0).epsilon(1e-14));
  const Vec x = nodal(mesh, [](Point p) { return p.x; });
  CHECK(x.dot(m * x) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("mass matrix integrates x squared on the default mesh") {
  const FineMesh mesh = build_fine_mesh(100, 100);
  const SpMat m = assemble_mass(mesh);
  const Vec one = Vec::Ones(mesh.node_count());
  const Vec x2 = nodal(mesh, [](Point p) { return p.x * p.x; });
  CHECK(std::abs(one.dot(m * x2) - 1.0 / 3.0) < 2e-4);
}

TEST_CASE("load vector sums to the source integral") {
  const FineMesh mesh = build_fine_mesh(100, 100);
  CHECK(assemble_load(mesh, [](Point) { return 1.0; }).sum() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(assemble_load(mesh, [](Point) { return 0.0; }).cwiseAbs().maxCoeff() == 0.0);
  const Vec sin2 = assemble_load(mesh, Source::sin2pi());
  CHECK(std::abs(sin2.sum() - 1.0) < 1e-6);
  // x y is quadratic, so edge-midpoint quadrature is exact: int x y = 1/4.
  const Vec xy = assemble_load(mesh, [](Point p) { return p.x * p.y; });
  CHECK(xy.sum() == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("dirichlet elimination") {
  const FineMesh one = build_fine_mesh(1, 1);
  const SpMat a1 = assemble_stiffness(one, std::vector<double>(2, 1.0));
  CHECK_THROWS_AS(apply_dirichlet(a1, Vec::Zero(4), one.boundary_nodes), InvalidArgument);

  const FineMesh two = build_fine_mesh(2, 2);
  const SpMat a2 = assemble_stiffness(two, std::vector<double>(8, 1.0));
  const DirichletSystem sys = apply_dirichlet(a2, Vec::Ones(9), two.boundary_nodes);
  CHECK(sys.matrix.rows() == 1);
  CHECK(sys.dofs.dof_to_node == std::vector<int>{4});
  CHECK(Mat(sys.matrix)(0, 0) == doctest::Approx(4.0).epsilon(1e-14));

  const FineMesh ten = build_fine_mesh(10, 10);
  const SpMat a10 = assemble_stiffness(ten, std::vector<double>(200, 1.0));
  const DirichletSystem s10 = apply_dirichlet(a10, Vec::Zero(121), ten.boundary_nodes);
  CHECK(s10.matrix.rows() == 81);
  Eigen::SelfAdjointEigenSolver<Mat> eig{Mat(s10.matrix)};
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("dof map extends with zeros and restricts back") {
  const DofMap map = make_dof_map(6, std::vector<int>{0, 3});
  CHECK(map.size() == 4);
  Vec d(4);
  d << 1, 2, 3, 4;
  const Vec e = map.extend(d);
  CHECK(e[0] == 0.0);
  CHECK(e[3] == 0.0);
  CHECK(e[4] == 3.0);
  CHECK(map.restrict(e) == d);
}

TEST_CASE("w0 matches a dense solve") {
  const FineModel model = channel_model(10, 1.0);
  const FineMesh& mesh = model.mesh();
  const Vec w0 = solve_elliptic_w0(mesh, model.permeability(), Source::sin2pi());
  const Mat a = dense_stiffness(mesh, model.permeability().values);
  const Vec h = assemble_load(mesh, Source::sin2pi());
  Mat ai(model.size(), model.size());
  Vec hi(model.size());
  for (int i = 0; i < model.size(); ++i) {
    hi[i] = h[model.dofs().dof_to_node[i]];
    for (int j = 0; j < model.size(); ++j) {
      ai(i, j) = a(model.dofs().dof_to_node[i], model.dofs().dof_to_node[j]);
    }
  }
  const Vec oracle = ai.partialPivLu().solve(hi);
  CHECK(rel_diff(w0, oracle) < 1e-10);
  CHECK(w0.minCoeff() >= -1e-14);
}

TEST_CASE("w0 for high contrast") {
  const FineModel model = channel_model(30);
  const Vec w0 = solve_elliptic_w0(model.mesh(), model.permeability(), Source::sin2pi());
  CHECK(w0.minCoeff() >= -1e-12);
  const Vec zero = solve_elliptic_w0(model.mesh(), model.permeability(), [](Point) { return 0.0; });
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("element stiffness reproduces assembled operators") {
  std::mt19937_64 rng(11);
  const FineModel model = channel_model(6, 50.0);
  const ElementStiffness& el = model.elements();
  const Vec ones = Vec::Ones(model.size());
  CHECK(rel_diff(Mat(el.weighted(ones, 1.0)), Mat(model.stiffness())) < 1e-13);

  const double mu = 5.0;
  const Vec u = 0.05 * random_vector(model.size(), rng);
  Vec b(model.size());
  for (Index i = 0; i < u.size(); ++i) {
    b[i] = std::exp(mu * u[i]);
  }
  CHECK(rel_diff(el.apply(u, b, 1.0), dense_F(model, u, mu)) < 1e-13);
  CHECK(rel_diff(Vec(el.weighted(b, 1.0) * u), el.apply(u, b, 1.0)) < 1e-13);
}

TEST_CASE("element jacobian matches finite differences") {
  std::mt19937_64 rng(12);
  const FineModel model = channel_model(6, 50.0);
  const ElementStiffness& el = model.elements();
  const double mu = 8.0;
  const auto f = [&](const Vec& u) {
    const Vec b = (mu * u.array()).exp().matrix();
    return el.apply(u, b, 1.0);
  };
  const Vec u = 0.05 * random_vector(model.size(), rng);
  const Vec b = (mu * u.array()).exp().matrix();
  const SpMat j = el.jacobian(u, b, mu * b, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    const Vec v = random_vector(model.size(), rng);
    const double eps = 1e-6;
    const Vec fd = (f(u + eps * v) - f(u - eps * v)) / (2.0 * eps);
    CHECK(rel_diff(Vec(j * v), fd) < 1e-7);
  }
}
