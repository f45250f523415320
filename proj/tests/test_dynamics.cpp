#include <doctest.h>

#include <cmath>

#include "dpilqr/dynamics.hpp"
#include "oracles.hpp"

using namespace dpilqr;

namespace {

Vec random_vec(Rng& rng, int n, double scale) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

void check_jacobians_at_random_points(const ModelPtr& model, int points,
                                      double control_scale = 1.0) {
  Rng rng(1234);
  Mat A, B;
  for (int p = 0; p < points; ++p) {
    const Vec x = random_vec(rng, model->state_dim(), 5.0);
    const Vec u = model->clamp(
        model->neutral_control() +
        random_vec(rng, model->control_dim(), control_scale));
    model->jacobians(x, u, 0.1, A, B);
    const auto [A_fd, B_fd] =
        oracles::finite_difference_jacobians(*model, x, u, 0.1);
    CHECK(oracles::relative_error(A_fd, A) <= 1e-5);
    CHECK(oracles::relative_error(B_fd, B) <= 1e-5);
  }
}

}  // namespace

TEST_CASE("double integrator: coast and acceleration") {
  const auto model = double_integrator_2d();
  Vec x(4), u(2);

  x << 0, 0, 1, 0;
  u << 0, 0;
  Vec next = model->step(x, u, 0.1);
  CHECK(next[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(next[1] == 0.0);
  CHECK(next[2] == 1.0);
  CHECK(next[3] == 0.0);

  x.setZero();
  u << 1, 0;
  next = model->step(x, u, 0.1);
  CHECK(next[0] == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(next[2] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("double integrator: constant jacobians match finite differences") {
  const auto model = double_integrator_2d();
  Mat A, B;
  Vec x(4), u(2);
  x << 1, -2, 0.5, 3;
  u << 0.7, -0.3;
  model->jacobians(x, u, 0.1, A, B);
  CHECK(A(0, 2) == doctest::Approx(0.1));
  CHECK(A(1, 3) == doctest::Approx(0.1));
  CHECK(A.topLeftCorner(2, 2).isIdentity(1e-14));
  check_jacobians_at_random_points(model, 100);
}

TEST_CASE("unicycle: straight-line and heading-aligned motion") {
  const auto model = unicycle_2d();
  Vec x(4), u(2);
  u << 0, 0;

  x << 0, 0, 0, 1;
  Vec next = model->step(x, u, 0.1);
  CHECK(next[0] == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(next[1] == doctest::Approx(0.0));
  CHECK(next[3] == 1.0);

  x << 0, 0, M_PI / 2.0, 1;
  next = model->step(x, u, 0.1);
  CHECK(next[1] == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(std::abs(next[0]) < 1e-10);
}

TEST_CASE("unicycle: jacobians match finite differences") {
  check_jacobians_at_random_points(unicycle_2d(), 100);
}

TEST_CASE("quadcopter: hover equilibrium and pitch response") {
  const double g = 9.81;
  const auto model = quadcopter_6d(g);
  Vec x(6), u(3);
  x << 1, 2, 3, 0, 0, 0;
  u = model->neutral_control();
  CHECK(u[2] == g);

  const Vec next = model->step(x, u, 0.1);
  CHECK((next - x).norm() < 1e-14);
}

TEST_CASE("quadcopter: small pitch accelerates forward") {
  const double g = 9.81;
  const auto model = quadcopter_6d(g);
  Vec x = Vec::Zero(6);
  Vec u(3);
  const double pitch = 0.05;
  u << pitch, 0, g;
  const Vec next = model->step(x, u, 0.1);
  CHECK(next[3] == doctest::Approx(g * std::tan(pitch) * 0.1).epsilon(1e-6));
}

TEST_CASE("quadcopter: rejects tilt limit beyond the tangent singularity") {
  CHECK_THROWS_AS(quadcopter_6d(9.81, M_PI / 2.0), ConfigError);
  CHECK_THROWS_AS(quadcopter_6d(-1.0), ConfigError);
}

TEST_CASE("quadcopter: jacobians match finite differences inside bounds") {
  check_jacobians_at_random_points(quadcopter_6d(), 100, 0.2);
}

TEST_CASE("rollout: fixed point at rest and feasibility invariant") {
  const auto model = double_integrator_2d();
  JointDynamics dyn({model});
  const Vec x0 = Vec::Zero(4);
  const Mat U = Mat::Zero(2, 10);
  const JointTrajectory traj = rollout(dyn, x0, U, 0.1);
  for (int k = 0; k <= 10; ++k) {
    CHECK(traj.states.col(k).isZero(0.0));
  }
}

TEST_CASE("rollout: separable agents coast independently") {
  JointDynamics dyn({double_integrator_2d(), double_integrator_2d()});
  Vec x0(8);
  x0 << 0, 0, 1, 0, 5, 5, 0, -1;
  const Mat U = Mat::Zero(4, 5);
  const JointTrajectory traj = rollout(dyn, x0, U, 0.1);
  CHECK(traj.states(0, 5) == doctest::Approx(0.5));
  CHECK(traj.states(7, 5) == doctest::Approx(-1.0));
  CHECK(traj.states(5, 5) == doctest::Approx(4.5));

  // feasibility: re-stepping reproduces the stored states exactly
  for (int k = 0; k < 5; ++k) {
    const Vec re = dyn.step(traj.states.col(k), traj.controls.col(k), 0.1);
    CHECK((re - traj.states.col(k + 1)).norm() == 0.0);
  }
}

TEST_CASE("rollout: perturbing one agent leaves the other bit-identical") {
  JointDynamics dyn({unicycle_2d(), unicycle_2d()});
  Rng rng(99);
  Vec x0(8);
  for (int i = 0; i < 8; ++i) x0[i] = rng.uniform(-2, 2);
  Mat U(4, 12);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 12; ++c) U(r, c) = rng.uniform(-1, 1);
  }
  const JointTrajectory base = rollout(dyn, x0, U, 0.1);

  Mat U2 = U;
  U2.row(2).setConstant(0.77);
  U2.row(3).setConstant(-0.1);
  const JointTrajectory pert = rollout(dyn, x0, U2, 0.1);
  // agent 0 rows are 0..3
  CHECK((base.states.topRows(4) - pert.states.topRows(4)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((base.states.bottomRows(4) - pert.states.bottomRows(4)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("rollout: dimension mismatches are configuration errors") {
  JointDynamics dyn({double_integrator_2d()});
  CHECK_THROWS_AS(rollout(dyn, Vec::Zero(3), Mat::Zero(2, 5), 0.1), ConfigError);
  CHECK_THROWS_AS(rollout(dyn, Vec::Zero(4), Mat::Zero(3, 5), 0.1), ConfigError);
}

TEST_CASE("rollout: controls are clamped to model bounds") {
  const auto model = quadcopter_6d(9.81, 0.3);
  JointDynamics dyn({model});
  Mat U = Mat::Zero(3, 3);
  U(0, 0) = 2.0;  // way past the tilt bound
  U(2, 0) = 9.81;
  const JointTrajectory traj = rollout(dyn, Vec::Zero(6), U, 0.1);
  CHECK(traj.controls(0, 0) == 0.3);
}

TEST_CASE("discretization: RK4 endpoint error shrinks ~16x when dt halves") {
  const auto model = unicycle_2d();
  Vec x(4), u(2);
  x << 0, 0, 0.3, 1.0;
  u << 0.8, 0.5;

  auto integrate = [&](double dt, int steps) {
    Vec s = x;
    for (int k = 0; k < steps; ++k) s = model->step(s, u, dt);
    return s;
  };
  // Richardson-style reference with a very fine grid
  const Vec ref = integrate(1e-4, 10000);
  const double err_coarse = (integrate(0.1, 10) - ref).norm();
  const double err_fine = (integrate(0.05, 20) - ref).norm();
  CHECK(err_fine < err_coarse / 8.0);  // at least ~O(dt^3) observed
}

TEST_CASE("joint state concat/split round-trips exactly") {
  JointDynamics dyn({double_integrator_2d(), unicycle_2d()});
  Rng rng(5);
  Vec x(8);
  for (int i = 0; i < 8; ++i) x[i] = rng.uniform(-3, 3);
  const auto parts = dyn.split_state(x);
  REQUIRE(parts.size() == 2);
  const Vec back = dyn.concat_states(parts);
  CHECK((back - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("model registry resolves keys and rejects unknowns") {
  CHECK(make_model("double_integrator")->state_dim() == 4);
  CHECK(make_model("unicycle")->control_dim() == 2);
  CHECK(make_model("quad6d")->position_dim() == 3);
  CHECK_THROWS_AS(make_model("bicycle"), ConfigError);
}
