#include <doctest.h>

#include <cmath>
#include <random>

#include "glrom/coarse.hpp"
#include "support.hpp"

using namespace glrom;
using namespace glrom::test;

namespace {

TimeSteppingConfig short_run(double t_final = 0.5) {
  TimeSteppingConfig c;
  c.t_final = t_final;
  return c;
}

double max_step_difference(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double worst = 0.0;
  for (size_t n = 0; n < std::min(a.size(), b.size()); ++n) {
    worst = std::max(worst, rel_diff(a[n], b[n]));
  }
  return worst;
}

}  // namespace

TEST_CASE("local deim of a constant field") {
  const FineModel model = channel_model(12);
  const CoarseGrid grid = build_coarse_grid(model.mesh(), 3, 3);
  std::mt19937_64 rng(31);
  const std::vector<TrainingRun> runs{{0.0, random_matrix(model.size(), 4, rng)}};
  const LocalDeimSet set =
      train_local_deim(runs, model.mesh(), grid, model.dofs(), model.nonlinearity(), 3);
  CHECK(set.regions.size() == 16);
  for (const RegionDeim& r : set.regions) {
    CHECK(r.model.size() == 1);
  }
  const Vec b = set.reconstruct(random_vector(model.size(), rng), 0.0, model.nonlinearity());
  CHECK((b.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("local deim reproduces its training states at full rank") {
  const FineModel model = channel_model(12);
  const CoarseGrid grid = build_coarse_grid(model.mesh(), 3, 3);
  std::mt19937_64 rng(32);
  const double mu = 10.0;
  const Mat states = 0.05 * random_matrix(model.size(), 3, rng);
  const std::vector<TrainingRun> runs{{mu, states}};
  const LocalDeimSet set =
      train_local_deim(runs, model.mesh(), grid, model.dofs(), model.nonlinearity(), 3);
  int owned = 0;
  for (const RegionDeim& r : set.regions) {
    owned += static_cast<int>(r.owned_dofs.size());
  }
  CHECK(owned == model.size());
  for (Index s = 0; s < 3; ++s) {
    const Vec u = states.col(s);
    CHECK(rel_diff(set.reconstruct(u, mu, model.nonlinearity()),
                   nodal_values(model.nonlinearity(), u, mu)) < 1e-10);
  }
}

TEST_CASE("more local points fit held-out states better") {
  const FineModel model = channel_model(20);
  const CoarseGrid grid = build_coarse_grid(model.mesh(), 4, 4);
  const double mu = 10.0;
  const Trajectory fom = solve_fom(model, mu, model.load(Source::sin2pi()),
                                   model.w0(Source::sin2pi()), short_run(1.0));
  Mat train(model.size(), 10), test(model.size(), 10);
  for (Index k = 0; k < 10; ++k) {
    train.col(k) = fom.states[2 * k + 1];
    test.col(k) = fom.states[2 * k + 2];
  }
  const std::vector<TrainingRun> runs{{mu, train}};
  const auto error = [&](int points) {
    const LocalDeimSet set =
        train_local_deim(runs, model.mesh(), grid, model.dofs(), model.nonlinearity(), points);
    double err = 0.0;
    for (Index k = 0; k < test.cols(); ++k) {
      const Vec exact = nodal_values(model.nonlinearity(), test.col(k), mu);
      err = std::max(err, rel_diff(set.reconstruct(test.col(k), mu, model.nonlinearity()), exact));
    }
    return err;
  };
  const double e1 = error(1);
  const double e4 = error(4);
  CHECK(e4 < e1);
  CHECK(e4 < 1e-4);
}

TEST_CASE("local deim argument checks") {
  const FineModel model = channel_model(6);
  const CoarseGrid grid = build_coarse_grid(model.mesh(), 2, 2);
  const std::vector<TrainingRun> none;
  CHECK_THROWS_AS(train_local_deim(none, model.mesh(), grid, model.dofs(), model.nonlinearity(), 2),
                  InvalidArgument);
  const std::vector<TrainingRun> wrong{{1.0, Mat::Zero(3, 2)}};
  CHECK_THROWS_AS(
      train_local_deim(wrong, model.mesh(), grid, model.dofs(), model.nonlinearity(), 2),
      InvalidArgument);
}

TEST_CASE("identity basis reproduces the fine solver") {
  const FineModel model = channel_model(10);
  const CoarseModel coarse(model, identity_basis(model.size()));
  const Vec load = model.load(Source::sin2pi());
  const Vec u0 = model.w0(Source::sin2pi());
  TimeSteppingConfig config = short_run();
  config.newton_tol = 1e-12;
  const Trajectory fom = solve_fom(model, 20.0, load, u0, config);
  const CoarseSolution cs = solve_coarse(coarse, 20.0, load, u0, config);
  CHECK(max_step_difference(fom.states, cs.trajectory.states) < 1e-8);
}

TEST_CASE("coarse operators") {
  std::mt19937_64 rng(33);
  const FineModel model = channel_model(20);
  const MultiscaleSpace space = small_space(model, 4, 3);
  const CoarseModel coarse(model, space.basis);
  const Mat phi = space.basis;
  const Vec z = 0.05 * random_vector(coarse.size(), rng);

  CHECK(rel_diff(coarse.mass(), Mat(phi.transpose() * model.mass() * phi)) < 1e-13);
  Eigen::SelfAdjointEigenSolver<Mat> eig(coarse.mass());
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
  CHECK(rel_diff(coarse.project(coarse.downscale(z)), z) < 1e-7);

  CHECK(rel_diff(coarse.reduced_F(z, 0.0), Vec(phi.transpose() * (model.stiffness() * (phi * z)))) <
        1e-12);
  CHECK(rel_diff(coarse.reduced_F(z, 10.0), Vec(phi.transpose() * dense_F(model, phi * z, 10.0))) <
        1e-12);

  const Mat tangent = coarse.reduced_tangent(z, 10.0);
  const Vec dir = random_vector(coarse.size(), rng);
  const double eps = 1e-6;
  const Vec fd = (coarse.reduced_F(z + eps * dir, 10.0) - coarse.reduced_F(z - eps * dir, 10.0)) /
                 (2.0 * eps);
  CHECK(rel_diff(Vec(tangent * dir), fd) < 1e-6);
}

TEST_CASE("coarse solve snapshots") {
  const FineModel model = channel_model(20);
  const MultiscaleSpace space = small_space(model, 4, 3);
  const CoarseModel coarse(model, space.basis);
  const double mu = 10.0;
  const CoarseSolution cs = solve_coarse(coarse, mu, model.load(Source::sin2pi()),
                                         model.w0(Source::sin2pi()), short_run());
  CHECK(cs.snapshots.rows() == coarse.size());
  CHECK(cs.snapshots.cols() == 10);
  CHECK(cs.f_snapshots.rows() == model.size());
  CHECK(cs.f_snapshots.cols() == 10);
  for (Index c = 0; c < 10; ++c) {
    CHECK(cs.snapshots.col(c) == cs.trajectory.states[c + 1]);
    const Vec u = coarse.downscale(cs.snapshots.col(c));
    CHECK(rel_diff(Vec(cs.f_snapshots.col(c)),
                   Vec(assemble_F(model, u, mu) - model.boundary_b(mu) * (model.stiffness() * u))) <
          1e-8);
  }

  const Vec zero = Vec::Zero(model.size());
  const CoarseSolution still = solve_coarse(coarse, mu, zero, zero, short_run());
  CHECK(still.snapshots.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("local deim at every dof is exact") {
  const FineModel model = channel_model(12);
  const CoarseGrid grid = build_coarse_grid(model.mesh(), 3, 3);
  const MultiscaleSpace space = small_space(model, 3, 3);
  const double mu = 10.0;
  std::mt19937_64 rng(34);
  // 100 random states give full-rank b snapshots on every neighborhood
  const std::vector<TrainingRun> runs{{mu, 0.05 * random_matrix(model.size(), 100, rng)}};
  int most = 0;
  for (const Region& r : grid.regions) {
    most = std::max(most, static_cast<int>(r.nodes.size()));
  }
  LocalDeimSet local =
      train_local_deim(runs, model.mesh(), grid, model.dofs(), model.nonlinearity(), most);
  const Vec u = 0.05 * random_vector(model.size(), rng);
  CHECK(rel_diff(local.reconstruct(u, mu, model.nonlinearity()),
                 nodal_values(model.nonlinearity(), u, mu)) < 1e-8);

  const Vec load = model.load(Source::sin2pi());
  const Vec u0 = model.w0(Source::sin2pi());
  const CoarseModel exact(model, space.basis);
  const CoarseModel interpolated(model, space.basis, std::move(local));
  const CoarseSolution a = solve_coarse(exact, mu, load, u0, short_run());
  const CoarseSolution b = solve_coarse(interpolated, mu, load, u0, short_run());
  CHECK(max_step_difference(a.trajectory.states, b.trajectory.states) < 1e-8);
}

TEST_CASE("coarse solution approximates the fine one") {
  const FineModel model = channel_model(20);
  const Vec load = model.load(Source::sin2pi());
  const Vec u0 = model.w0(Source::sin2pi());
  const Trajectory fom = solve_fom(model, 10.0, load, u0, short_run(1.0));
  double previous = 2.0;
  for (int m : {1, 3, 5}) {
    const MultiscaleSpace space = small_space(model, 4, m);
    const CoarseModel coarse(model, space.basis);
    const CoarseSolution cs = solve_coarse(coarse, 10.0, load, u0, short_run(1.0));
    const Vec diff = fom.final_state() - coarse.downscale(cs.trajectory.final_state());
    const SpMat a = model.frozen_stiffness(fom.final_state(), 10.0);
    const double err = std::sqrt(diff.dot(a * diff) / fom.final_state().dot(a * fom.final_state()));
    CHECK(err < previous);
    previous = err;
  }
  CHECK(previous < 0.3);
}
