#include <doctest.h>

#include <cmath>

#include "dpilqr/costs.hpp"
#include "dpilqr/dynamics.hpp"
#include "oracles.hpp"

using namespace dpilqr;

namespace {

TrackingCost simple_tracking(int nx, int nu, double q = 1.0, double r = 1.0,
                             double qf = 1.0) {
  return make_tracking_cost(q * Mat::Identity(nx, nx),
                            r * Mat::Identity(nu, nu),
                            qf * Mat::Identity(nx, nx), Vec::Zero(nx),
                            Vec::Zero(nu));
}

struct RandomProblem {
  JointDynamics dyn;
  PotentialSpec spec;
  JointTrajectory traj;
};

RandomProblem random_problem(std::uint64_t seed, int n_agents, int horizon,
                             double beta = 10.0, double d_prox = 1.5) {
  Rng rng(seed);
  std::vector<ModelPtr> models(n_agents, double_integrator_2d());
  JointDynamics dyn(models);

  std::vector<TrackingCost> tracking;
  for (int i = 0; i < n_agents; ++i) {
    Vec goal(4);
    for (int c = 0; c < 4; ++c) goal[c] = rng.uniform(-3, 3);
    Vec q_diag(4);
    for (int c = 0; c < 4; ++c) q_diag[c] = rng.uniform(0.1, 2.0);
    tracking.push_back(make_tracking_cost(
        Mat(q_diag.asDiagonal()), 0.5 * Mat::Identity(2, 2),
        Mat(3.0 * q_diag.asDiagonal()), goal, Vec::Zero(2)));
  }
  PotentialSpec spec =
      make_centralized_spec(std::move(tracking), ProximityCost{beta, d_prox});

  Vec x0(dyn.state_dim());
  for (int c = 0; c < x0.size(); ++c) x0[c] = rng.uniform(-2, 2);
  Mat U(dyn.control_dim(), horizon);
  for (int r = 0; r < U.rows(); ++r) {
    for (int c = 0; c < U.cols(); ++c) U(r, c) = rng.uniform(-1, 1);
  }
  JointTrajectory traj = rollout(dyn, x0, U, 0.1);
  return RandomProblem{std::move(dyn), std::move(spec), std::move(traj)};
}

}  // namespace

TEST_CASE("tracking cost: zero at the reference, unit on a unit offset") {
  const auto tc = simple_tracking(3, 2);
  CHECK(tracking_cost(tc, Vec::Zero(3), Vec::Zero(2)) == 0.0);

  Vec x = Vec::Zero(3);
  x[0] = 1.0;
  CHECK(tracking_cost(tc, x, Vec::Zero(2)) == doctest::Approx(1.0));
  CHECK(terminal_tracking_cost(tc, x) == doctest::Approx(1.0));
}

TEST_CASE("tracking cost: matches an independent quadratic-form evaluation") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    Mat L = Mat::Random(4, 4);
    Mat Q = L * L.transpose();  // PSD
    Mat Lr = Mat::Random(2, 2);
    Mat R = Lr * Lr.transpose() + Mat::Identity(2, 2);
    Vec goal = Vec::Random(4), uref = Vec::Random(2);
    const auto tc = make_tracking_cost(Q, R, 2.0 * Q, goal, uref);

    const Vec x = Vec::Random(4), u = Vec::Random(2);
    const double expected =
        oracles::qform(Q, x - goal) + oracles::qform(R, u - uref);
    CHECK(tracking_cost(tc, x, u) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("tracking cost: construction validates PSD/PD to tolerance") {
  Mat Q = Mat::Identity(2, 2);
  Mat R = Mat::Identity(1, 1);
  Mat bad_q = Q;
  bad_q(0, 0) = -0.1;
  CHECK_THROWS_AS(
      make_tracking_cost(bad_q, R, Q, Vec::Zero(2), Vec::Zero(1)),
      ConfigError);
  Mat asym = Q;
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(
      make_tracking_cost(asym, R, Q, Vec::Zero(2), Vec::Zero(1)),
      ConfigError);
  CHECK_THROWS_AS(
      make_tracking_cost(Q, Mat::Zero(1, 1), Q, Vec::Zero(2), Vec::Zero(1)),
      ConfigError);
  // zero eigenvalue is fine for Q
  CHECK_NOTHROW(
      make_tracking_cost(Mat::Zero(2, 2), R, Q, Vec::Zero(2), Vec::Zero(1)));
}

TEST_CASE("proximity cost: hinge value, boundary, and symmetry") {
  const ProximityCost pc{1.0, 0.5};
  Vec a(2), b(2);
  a << 0, 0;

  b << 0.5, 0;  // exactly at the threshold
  CHECK(proximity_cost(pc, a, b) == 0.0);
  CHECK(proximity_gradient(pc, a, b).norm() == 0.0);

  b << 0.25, 0;
  CHECK(proximity_cost(pc, a, b) == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(proximity_cost(pc, a, b) == proximity_cost(pc, b, a));

  b << 2.0, 1.0;
  CHECK(proximity_cost(pc, a, b) == 0.0);
}

TEST_CASE("proximity cost: C1 at the threshold from inside") {
  const ProximityCost pc{7.0, 0.5};
  Vec a = Vec::Zero(2), b(2);
  for (double eps : {1e-3, 1e-5, 1e-7}) {
    b << 0.5 - eps, 0.0;
    CHECK(proximity_cost(pc, a, b) <= 7.0 * eps * eps + 1e-18);
    CHECK(proximity_gradient(pc, a, b).norm() <= 2.0 * 7.0 * eps + 1e-12);
  }
}

TEST_CASE("proximity cost: coincident positions use the axis convention") {
  const ProximityCost pc{3.0, 0.5};
  const Vec p = Vec::Constant(2, 1.0);
  CHECK(proximity_cost(pc, p, p) == doctest::Approx(3.0 * 0.25));
  const Vec g = proximity_gradient(pc, p, p);
  CHECK(g[0] == doctest::Approx(-2.0 * 3.0 * 0.5));
  CHECK(g[1] == 0.0);
}

TEST_CASE("proximity gradient matches finite differences near the hinge") {
  const ProximityCost pc{5.0, 1.0};
  Rng rng(7);
  int active = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Vec a(2), b(2);
    for (int c = 0; c < 2; ++c) {
      a[c] = rng.uniform(-0.8, 0.8);
      b[c] = rng.uniform(-0.8, 0.8);
    }
    if ((a - b).norm() < 1e-3) continue;  // keep FD away from the kink at 0
    const Vec g = proximity_gradient(pc, a, b);
    const Vec g_fd = oracles::finite_difference_gradient(
        [&](const Vec& p) { return proximity_cost(pc, p, b); }, a, 1e-7);
    CHECK((g - g_fd).norm() <= 1e-5 * (1.0 + g_fd.norm()));
    if (g.norm() > 0) ++active;
  }
  CHECK(active > 10);  // the sampler actually exercised the active branch
}

TEST_CASE("proximity hessian: PSD and zero beyond the threshold") {
  const ProximityCost pc{5.0, 1.0};
  Vec a(2), b(2);
  a << 0.3, 0.1;
  b << 0.0, 0.0;
  const Mat H = proximity_hessian_psd(pc, a, b);
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(2.0 * pc.beta));

  a << 3.0, 0.0;
  CHECK(proximity_hessian_psd(pc, a, b).norm() == 0.0);
}

TEST_CASE("potential: zero at the global minimum, reduces to LQR for N=1") {
  // two agents, both exactly at their goals and far apart
  std::vector<TrackingCost> tracking;
  Vec goal0(4), goal1(4);
  goal0 << 0, 0, 0, 0;
  goal1 << 5, 5, 0, 0;
  tracking.push_back(make_tracking_cost(Mat::Identity(4, 4),
                                        Mat::Identity(2, 2),
                                        Mat::Identity(4, 4), goal0,
                                        Vec::Zero(2)));
  tracking.push_back(make_tracking_cost(Mat::Identity(4, 4),
                                        Mat::Identity(2, 2),
                                        Mat::Identity(4, 4), goal1,
                                        Vec::Zero(2)));
  const auto spec =
      make_centralized_spec(std::move(tracking), ProximityCost{50.0, 0.5});
  JointDynamics dyn({double_integrator_2d(), double_integrator_2d()});

  Vec x0(8);
  x0 << goal0, goal1;
  const JointTrajectory traj = rollout(dyn, x0, Mat::Zero(4, 10), 0.1);
  CHECK(potential_value(spec, dyn, traj) == 0.0);

  // N=1: no pairs at all
  const auto single = random_problem(3, 1, 15);
  CHECK(single.spec.pairs.empty());
  double tracking_only = 0.0;
  const int T = single.traj.horizon();
  for (int k = 0; k < T; ++k) {
    tracking_only += tracking_cost(single.spec.tracking[0],
                                   single.traj.states.col(k),
                                   single.traj.controls.col(k));
  }
  tracking_only += terminal_tracking_cost(single.spec.tracking[0],
                                          single.traj.states.col(T));
  CHECK(potential_value(single.spec, single.dyn, single.traj) ==
        doctest::Approx(tracking_only).epsilon(1e-12));
}

TEST_CASE("potential: N=3 complete graph equals brute-force enumeration") {
  const auto prob = random_problem(11, 3, 20, 10.0, 3.0);
  CHECK(prob.spec.pairs.size() == 3);
  const double brute =
      oracles::brute_force_potential(prob.spec, prob.dyn, prob.traj);
  CHECK(potential_value(prob.spec, prob.dyn, prob.traj) ==
        doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("exact-potential identity: unilateral change moves J_i and the "
          "potential equally") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int n_agents = 2 + static_cast<int>(rng.next() % 3);
    auto prob = random_problem(1000 + trial, n_agents, 15, 20.0, 2.5);
    const int agent = static_cast<int>(rng.next() % n_agents);

    Mat U2 = prob.traj.controls;
    const int mo = prob.dyn.control_offset(agent);
    for (int c = 0; c < U2.cols(); ++c) {
      U2(mo, c) += rng.uniform(-0.5, 0.5);
      U2(mo + 1, c) += rng.uniform(-0.5, 0.5);
    }
    const JointTrajectory pert =
        rollout(prob.dyn, prob.traj.states.col(0), U2, 0.1);

    const double dJ = agent_cost(prob.spec, prob.dyn, pert, agent) -
                      agent_cost(prob.spec, prob.dyn, prob.traj, agent);
    const double dP = potential_value(prob.spec, prob.dyn, pert) -
                      potential_value(prob.spec, prob.dyn, prob.traj);
    CHECK(std::abs(dJ - dP) <= 1e-10 * std::max(1.0, std::abs(dP)));
  }
}

TEST_CASE("local-global consistency: summing per-agent pair terms double "
          "counts each pair") {
  const auto prob = random_problem(77, 4, 10, 30.0, 4.0);

  auto pair_terms_for_agent = [&](int agent) {
    double total = 0.0;
    const int T = prob.traj.horizon();
    for (int k = 0; k < T; ++k) {
      const Vec x = prob.traj.states.col(k);
      for (const auto& [i, j] : prob.spec.pairs) {
        if (i == agent || j == agent) {
          total += proximity_cost(prob.spec.coupling,
                                  prob.dyn.agent_position(x, i),
                                  prob.dyn.agent_position(x, j));
        }
      }
    }
    return total;
  };
  auto all_pair_terms = [&]() {
    double total = 0.0;
    const int T = prob.traj.horizon();
    for (int k = 0; k < T; ++k) {
      const Vec x = prob.traj.states.col(k);
      for (const auto& [i, j] : prob.spec.pairs) {
        total += proximity_cost(prob.spec.coupling,
                                prob.dyn.agent_position(x, i),
                                prob.dyn.agent_position(x, j));
      }
    }
    return total;
  };

  double summed = 0.0;
  for (int i = 0; i < 4; ++i) summed += pair_terms_for_agent(i);
  CHECK(summed == doctest::Approx(2.0 * all_pair_terms()).epsilon(1e-12));
}

TEST_CASE("quadraticize: stationary at the minimum, matches finite "
          "differences elsewhere") {
  // stationary point: both agents at goals with reference controls
  {
    std::vector<TrackingCost> tracking;
    Vec goal0(4), goal1(4);
    goal0 << 0, 0, 0, 0;
    goal1 << 5, 5, 0, 0;
    tracking.push_back(make_tracking_cost(Mat::Identity(4, 4),
                                          Mat::Identity(2, 2),
                                          Mat::Identity(4, 4), goal0,
                                          Vec::Zero(2)));
    tracking.push_back(make_tracking_cost(Mat::Identity(4, 4),
                                          Mat::Identity(2, 2),
                                          Mat::Identity(4, 4), goal1,
                                          Vec::Zero(2)));
    const auto spec =
        make_centralized_spec(std::move(tracking), ProximityCost{50.0, 0.5});
    JointDynamics dyn({double_integrator_2d(), double_integrator_2d()});
    Vec x(8);
    x << goal0, goal1;
    const auto q = quadraticize_stage(spec, dyn, x, Vec::Zero(4));
    CHECK(q.lx.norm() == 0.0);
    CHECK(q.lu.norm() == 0.0);
  }

  // random operating points: gradient check against the scalar stage value
  Rng rng(31);
  const auto prob = random_problem(55, 3, 5, 25.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vec x(prob.dyn.state_dim());
    Vec u(prob.dyn.control_dim());
    for (int c = 0; c < x.size(); ++c) x[c] = rng.uniform(-2.5, 2.5);
    for (int c = 0; c < u.size(); ++c) u[c] = rng.uniform(-1, 1);

    const auto q = quadraticize_stage(prob.spec, prob.dyn, x, u);
    const Vec gx_fd = oracles::finite_difference_gradient(
        [&](const Vec& xv) {
          JointTrajectory one;
          one.states.resize(x.size(), 2);
          one.states.col(0) = xv;
          one.states.col(1).setZero();
          one.controls = u;
          // isolate the stage term: subtract the terminal part evaluated at 0
          const double terminal = [&] {
            double t = 0.0;
            for (int a = 0; a < prob.dyn.num_agents(); ++a) {
              t += terminal_tracking_cost(
                  prob.spec.tracking[a],
                  prob.dyn.agent_state(one.states.col(1), a));
            }
            return t;
          }();
          return potential_value(prob.spec, prob.dyn, one) - terminal;
        },
        x, 1e-6);
    CHECK((q.lx - gx_fd).norm() <= 2e-5 * (1.0 + gx_fd.norm()));

    const Vec gu_fd = oracles::finite_difference_gradient(
        [&](const Vec& uv) {
          double t = 0.0;
          for (int a = 0; a < prob.dyn.num_agents(); ++a) {
            t += tracking_cost(prob.spec.tracking[a],
                               prob.dyn.agent_state(x, a),
                               prob.dyn.agent_control(uv, a));
          }
          return t;
        },
        u, 1e-6);
    CHECK((q.lu - gu_fd).norm() <= 2e-5 * (1.0 + gu_fd.norm()));
  }
}

TEST_CASE("quadraticize: inactive pair contributes an exactly zero block") {
  auto prob = random_problem(66, 2, 5, 25.0, 0.4);
  Vec x(prob.dyn.state_dim());
  x << 0, 0, 0, 0, 9, 9, 0, 0;  // far apart
  const auto q = quadraticize_stage(prob.spec, prob.dyn, x,
                                    Vec::Zero(prob.dyn.control_dim()));
  CHECK(q.lxx.block(0, 4, 4, 4).norm() == 0.0);
  // diagonal blocks only carry the tracking weights
  CHECK((q.lxx.block(0, 0, 4, 4) - 2.0 * prob.spec.tracking[0].Q).norm() ==
        doctest::Approx(0.0));
}

TEST_CASE("quadraticize: terminal stage selects Qf and no control terms") {
  const auto prob = random_problem(10, 2, 6);
  const auto q = quadraticize(prob.spec, prob.dyn, prob.traj, 6);
  CHECK(q.lu.size() == 0);
  CHECK(q.lxx.block(0, 0, 4, 4)
            .isApprox(Mat(2.0 * prob.spec.tracking[0].Qf), 1e-14));
  CHECK_THROWS_AS(quadraticize(prob.spec, prob.dyn, prob.traj, 7),
                  ConfigError);
}
