#include <doctest.h>

#include <cmath>
#include <random>

#include "glrom/fom.hpp"
#include "support.hpp"

using namespace glrom;
using namespace glrom::test;

TEST_CASE("F matches the element oracle") {
  std::mt19937_64 rng(21);
  for (const Nonlinearity& b : {Nonlinearity::exp_mu_u(), Nonlinearity::exp_mu_shifted(0.9)}) {
    const FineModel model = channel_model(5, 100.0, b);
    for (double mu : {0.0, 3.0, 10.0}) {
      const Vec u = 0.05 * random_vector(model.size(), rng);
      CHECK(rel_diff(assemble_F(model, u, mu), dense_F(model, u, mu)) < 1e-13);
    }
  }
}

TEST_CASE("F at mu zero is the linear stiffness") {
  std::mt19937_64 rng(22);
  const FineModel model = channel_model(10);
  const Vec u = random_vector(model.size(), rng);
  CHECK(rel_diff(assemble_F(model, u, 0.0), Vec(model.stiffness() * u)) < 1e-13);
  CHECK(assemble_F(model, Vec::Zero(model.size()), 10.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("remainder removes the linear part") {
  std::mt19937_64 rng(23);
  const FineModel model = channel_model(8, 100.0);
  const Vec u = 0.05 * random_vector(model.size(), rng);
  const double mu = 12.0;
  const Vec expected = assemble_F(model, u, mu) - model.boundary_b(mu) * (model.stiffness() * u);
  CHECK(rel_diff(assemble_remainder(model, u, mu), expected) < 1e-10);
  CHECK(assemble_remainder(model, u, 0.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("frozen stiffness reproduces F") {
  std::mt19937_64 rng(24);
  const FineModel model = channel_model(8, 100.0);
  const Vec u = 0.05 * random_vector(model.size(), rng);
  CHECK(rel_diff(Vec(model.frozen_stiffness(u, 7.0) * u), assemble_F(model, u, 7.0)) < 1e-13);
}

TEST_CASE("jacobian matches central differences of the residual") {
  std::mt19937_64 rng(25);
  const FineModel model = channel_model(10);
  const Vec load = model.load(Source::sin2pi());
  const Vec w0 = model.w0(Source::sin2pi());
  const double dt = 0.05;
  for (int trial = 0; trial < 10; ++trial) {
    const double mu = 5.0 + 5.0 * trial;
    const Vec u = w0 + 0.01 * w0.norm() / std::sqrt(double(w0.size())) * random_vector(w0.size(), rng);
    const Vec v = random_vector(w0.size(), rng);
    const JacobianOperator j = assemble_J(model, u, mu, dt);
    const double eps = 1e-6;
    const Vec fd = (fine_residual(model, u + eps * v, w0, mu, dt, load) -
                    fine_residual(model, u - eps * v, w0, mu, dt, load)) /
                   (2.0 * eps);
    CHECK(rel_diff(j.apply(v), fd) < 1e-5);
  }
}

TEST_CASE("jacobian special cases") {
  std::mt19937_64 rng(26);
  const FineModel model = channel_model(8);
  const Vec u = 0.02 * random_vector(model.size(), rng);
  const Vec v = random_vector(model.size(), rng);
  // dt = 0 is rejected by the time stepper but the operator is still I.
  CHECK(rel_diff(assemble_J(model, u, 10.0, 0.0).apply(v), v) < 1e-14);
  CHECK(rel_diff(Mat(assemble_J(model, u, 0.0, 0.1).tangent()), Mat(model.stiffness())) < 1e-13);
}

TEST_CASE("newton iteration counts") {
  const FineModel model = channel_model(10);
  const Vec load = model.load(Source::sin2pi());
  TimeSteppingConfig config;
  const Vec u0 = 0.5 * model.w0(Source::sin2pi());
  CHECK(step_newton(model, u0, 0.0, load, config).iterations == 1);
  const Vec zero = Vec::Zero(model.size());
  const StepResult still = step_newton(model, zero, 10.0, zero, config);
  CHECK(still.iterations == 0);
  CHECK(still.state.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("newton step satisfies the residual") {
  const FineModel model = channel_model(12);
  const Vec load = model.load(Source::sin2pi());
  const Vec u0 = model.w0(Source::sin2pi());
  TimeSteppingConfig config;
  const StepResult r = step_newton(model, u0, 20.0, load, config);
  CHECK(r.iterations >= 1);
  CHECK(fine_residual(model, r.state, u0, 20.0, config.dt, load).norm() < 1e-8 * u0.norm());
}

TEST_CASE("zero data gives the zero trajectory") {
  const FineModel model = channel_model(10);
  const Vec zero = Vec::Zero(model.size());
  TimeSteppingConfig config;
  config.t_final = 0.5;
  const Trajectory t = solve_fom(model, 10.0, zero, zero, config);
  CHECK(t.steps() == 10);
  CHECK(t.states.size() == 11);
  for (const Vec& s : t.states) {
    CHECK(s.cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(t.steady_step == 1);
}

TEST_CASE("trajectory reaches steady state") {
  const FineModel model = channel_model(10);
  TimeSteppingConfig config;
  config.t_final = 20.0;
  config.dt = 0.5;
  config.stop_at_steady = true;
  ParameterSet theta{Source::sin2pi(), {10.0}, InitialCondition::zero()};
  const Trajectory t = solve_fom(model, theta, config);
  REQUIRE(t.steady_step > 0);
  CHECK(t.steps() == t.steady_step);
  const Vec& u = t.final_state();
  CHECK((assemble_F(model, u, 10.0) - model.load(Source::sin2pi())).norm() <
        1e-6 * model.load(Source::sin2pi()).norm());
}

TEST_CASE("backward Euler is first order in time") {
  const FineModel model = channel_model(10, 1.0);
  const Vec load = model.load(Source::sin2pi());
  const Vec u0 = 0.5 * model.w0(Source::sin2pi());
  const auto final_state = [&](double dt) {
    TimeSteppingConfig config;
    config.dt = dt;
    config.t_final = 0.1;
    config.newton_tol = 1e-12;
    return solve_fom(model, 2.0, load, u0, config).final_state();
  };
  const Vec reference = final_state(0.1 / 256);
  const double e1 = (final_state(0.02) - reference).norm();
  const double e2 = (final_state(0.01) - reference).norm();
  const double e3 = (final_state(0.005) - reference).norm();
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.15));
  CHECK(e2 / e3 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("newton monitor") {
  NewtonMonitor grow(4);
  CHECK_FALSE(grow.accept(1.0, 1e-8));
  CHECK_FALSE(grow.accept(2.0, 1e-8));
  CHECK_FALSE(grow.accept(3.0, 1e-8));
  CHECK_THROWS_AS(grow.accept(4.0, 1e-8), ConvergenceError);

  NewtonMonitor reset(1);
  CHECK_FALSE(reset.accept(1.0, 1e-8));
  CHECK_FALSE(reset.accept(2.0, 1e-8));
  CHECK_FALSE(reset.accept(1.5, 1e-8));
  CHECK_FALSE(reset.accept(1.6, 1e-8));
  CHECK_FALSE(reset.accept(1.7, 1e-8));
  CHECK(reset.accept(1e-9, 1e-8));

  NewtonMonitor nan(2);
  CHECK_THROWS_AS(nan.accept(std::nan(""), 1e-8), ConvergenceError);
}

TEST_CASE("newton failures are reported") {
  const FineModel model = channel_model(10);
  const Vec load = model.load(Source::sin2pi());
  const Vec u0 = model.w0(Source::sin2pi());
  TimeSteppingConfig capped;
  capped.max_newton = 1;
  CHECK_THROWS_AS(step_newton(model, u0, 40.0, load, capped), ConvergenceError);
  CHECK_THROWS_AS(step_newton(model, u0, 1e5, load, TimeSteppingConfig{}), Error);
}

TEST_CASE("time stepping validation") {
  TimeSteppingConfig c;
  CHECK(c.step_count() == 40);
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.max_newton = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}
