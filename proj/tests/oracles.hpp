// Independent reference implementations used to check the library. These
// deliberately avoid the code paths they verify: plain loops, textbook
// recursions, and central finite differences only.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "dpilqr/costs.hpp"
#include "dpilqr/dynamics.hpp"
#include "dpilqr/graph.hpp"
#include "dpilqr/types.hpp"

namespace oracles {

using dpilqr::Mat;
using dpilqr::Vec;

inline std::pair<Mat, Mat> finite_difference_jacobians(
    const dpilqr::DynamicsModel& model, const Vec& x, const Vec& u, double dt,
    double h = 1e-6) {
  const int n = model.state_dim();
  const int m = model.control_dim();
  Mat A(n, n), B(n, m);
  for (int c = 0; c < n; ++c) {
    Vec xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    A.col(c) = (model.step(xp, u, dt) - model.step(xm, u, dt)) / (2.0 * h);
  }
  for (int c = 0; c < m; ++c) {
    Vec up = u, um = u;
    up[c] += h;
    um[c] -= h;
    B.col(c) = (model.step(x, up, dt) - model.step(x, um, dt)) / (2.0 * h);
  }
  return {A, B};
}

inline Vec finite_difference_gradient(const std::function<double(const Vec&)>& f,
                                      const Vec& v, double h = 1e-6) {
  Vec g(v.size());
  for (int c = 0; c < v.size(); ++c) {
    Vec vp = v, vm = v;
    vp[c] += h;
    vm[c] -= h;
    g[c] = (f(vp) - f(vm)) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const Mat& approx, const Mat& exact) {
  return (approx - exact).norm() / (1.0 + exact.norm());
}

/// Textbook finite-horizon discrete-time LQR for
///   sum_k x'Qx + u'Ru + x_T' Qf x_T,  x_{k+1} = A x_k + B u_k.
/// Returns the optimal control sequence from x0.
struct LqrSolution {
  std::vector<Mat> gains;  // u_k = -K_k x_k
  Mat controls;            // m x T
  Mat states;              // n x (T+1)
};

inline LqrSolution lqr_riccati(const Mat& A, const Mat& B, const Mat& Q,
                               const Mat& R, const Mat& Qf, const Vec& x0,
                               int T) {
  LqrSolution sol;
  sol.gains.resize(T);
  std::vector<Mat> P(T + 1);
  P[T] = Qf;
  for (int k = T - 1; k >= 0; --k) {
    const Mat BtP = B.transpose() * P[k + 1];
    sol.gains[k] = (R + BtP * B).inverse() * (BtP * A);
    P[k] = Q + A.transpose() * P[k + 1] * (A - B * sol.gains[k]);
  }
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  sol.states.resize(n, T + 1);
  sol.controls.resize(m, T);
  sol.states.col(0) = x0;
  for (int k = 0; k < T; ++k) {
    sol.controls.col(k) = -sol.gains[k] * sol.states.col(k);
    sol.states.col(k + 1) = A * sol.states.col(k) + B * sol.controls.col(k);
  }
  return sol;
}

/// Quadratic form by explicit loops.
inline double qform(const Mat& M, const Vec& v) {
  double acc = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    for (int j = 0; j < v.size(); ++j) acc += v[i] * M(i, j) * v[j];
  }
  return acc;
}

/// Hinge penalty and tracking terms summed with explicit pair loops.
inline double brute_force_potential(const dpilqr::PotentialSpec& spec,
                                    const dpilqr::JointDynamics& dyn,
                                    const dpilqr::JointTrajectory& traj) {
  const int T = traj.horizon();
  double total = 0.0;
  for (int k = 0; k < T; ++k) {
    const Vec x = traj.states.col(k);
    const Vec u = traj.controls.col(k);
    for (int a = 0; a < dyn.num_agents(); ++a) {
      const auto& tc = spec.tracking[a];
      total += qform(tc.Q, dyn.agent_state(x, a) - tc.x_goal);
      total += qform(tc.R, dyn.agent_control(u, a) - tc.u_ref);
    }
    for (const auto& [i, j] : spec.pairs) {
      const double d =
          (dyn.agent_position(x, i) - dyn.agent_position(x, j)).norm();
      if (d < spec.coupling.d_prox) {
        total += spec.coupling.beta * (d - spec.coupling.d_prox) *
                 (d - spec.coupling.d_prox);
      }
    }
  }
  const Vec xT = traj.states.col(T);
  for (int a = 0; a < dyn.num_agents(); ++a) {
    const auto& tc = spec.tracking[a];
    total += qform(tc.Qf, dyn.agent_state(xT, a) - tc.x_goal);
  }
  return total;
}

/// Direct enumeration of the proximity criterion over all pairs and steps.
inline dpilqr::InteractionGraph brute_force_graph(
    const dpilqr::JointTrajectory& traj, const dpilqr::JointDynamics& dyn,
    double threshold) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < dyn.num_agents(); ++i) {
    for (int j = 0; j < dyn.num_agents(); ++j) {
      if (j <= i) continue;
      bool hit = false;
      for (int k = 0; k < traj.horizon(); ++k) {
        const Vec x = traj.states.col(k);
        if ((dyn.agent_position(x, i) - dyn.agent_position(x, j)).norm() <
            threshold) {
          hit = true;
        }
      }
      if (hit) edges.emplace_back(i, j);
    }
  }
  return dpilqr::make_graph(dyn.num_agents(), edges);
}

}  // namespace oracles
