#include "dpilqr/costs.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace dpilqr {
namespace {

constexpr double kSpdTol = 1e-10;

void check_symmetric_with_floor(const Mat& M, bool strict, const char* what) {
  if (M.rows() != M.cols()) {
    throw ConfigError(std::string(what) + " must be square");
  }
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > kSpdTol) {
    throw ConfigError(std::string(what) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  const double floor = strict ? kSpdTol : -kSpdTol;
  if (es.eigenvalues().minCoeff() < floor) {
    throw ConfigError(std::string(what) +
                      (strict ? " must be positive definite"
                              : " must be positive semidefinite"));
  }
}

}  // namespace

TrackingCost make_tracking_cost(Mat Q, Mat R, Mat Qf, Vec x_goal, Vec u_ref) {
  check_symmetric_with_floor(Q, false, "Q");
  check_symmetric_with_floor(Qf, false, "Q_f");
  check_symmetric_with_floor(R, true, "R");
  if (Q.rows() != x_goal.size() || Qf.rows() != x_goal.size()) {
    throw ConfigError("tracking cost: goal dimension does not match Q/Q_f");
  }
  if (R.rows() != u_ref.size()) {
    throw ConfigError("tracking cost: reference control does not match R");
  }
  return TrackingCost{std::move(Q), std::move(R), std::move(Qf),
                      std::move(x_goal), std::move(u_ref)};
}

PotentialSpec make_centralized_spec(std::vector<TrackingCost> tracking,
                                    const ProximityCost& coupling) {
  PotentialSpec spec;
  const int n = static_cast<int>(tracking.size());
  spec.agents.resize(n);
  for (int i = 0; i < n; ++i) spec.agents[i] = i;
  spec.tracking = std::move(tracking);
  spec.coupling = coupling;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) spec.pairs.emplace_back(i, j);
  }
  return spec;
}

double tracking_cost(const TrackingCost& tc, const Vec& x, const Vec& u) {
  const Vec dx = x - tc.x_goal;
  const Vec du = u - tc.u_ref;
  return dx.dot(tc.Q * dx) + du.dot(tc.R * du);
}

double terminal_tracking_cost(const TrackingCost& tc, const Vec& x) {
  const Vec dx = x - tc.x_goal;
  return dx.dot(tc.Qf * dx);
}

double proximity_cost(const ProximityCost& pc, const Vec& p_i,
                      const Vec& p_j) {
  const double d = (p_i - p_j).norm();
  if (d >= pc.d_prox) return 0.0;
  const double e = d - pc.d_prox;
  return pc.beta * e * e;
}

namespace {

// Unit vector from p_j to p_i; first coordinate axis when coincident.
Vec separation_direction(const Vec& r, double d) {
  if (d > 0.0) return r / d;
  Vec dir = Vec::Zero(r.size());
  dir[0] = 1.0;
  return dir;
}

}  // namespace

Vec proximity_gradient(const ProximityCost& pc, const Vec& p_i,
                       const Vec& p_j) {
  const Vec r = p_i - p_j;
  const double d = r.norm();
  if (d >= pc.d_prox) return Vec::Zero(r.size());
  const Vec dir = separation_direction(r, d);
  return 2.0 * pc.beta * (d - pc.d_prox) * dir;
}

Mat proximity_hessian_psd(const ProximityCost& pc, const Vec& p_i,
                          const Vec& p_j) {
  const int dim = static_cast<int>(p_i.size());
  const Vec r = p_i - p_j;
  const double d = r.norm();
  if (d >= pc.d_prox) return Mat::Zero(dim, dim);

  const Vec dir = separation_direction(r, d);
  Mat H;
  if (d > 0.0) {
    const double e = d - pc.d_prox;
    H = 2.0 * pc.beta *
        ((1.0 - e / d) * (dir * dir.transpose()) +
         (e / d) * Mat::Identity(dim, dim));
  } else {
    H = 2.0 * pc.beta * (dir * dir.transpose());
  }

  // The hinge is nonconvex in position; clamp negative curvature so the
  // Riccati pass sees a PSD stage Hessian.
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  const Vec clamped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clamped.asDiagonal() *
         es.eigenvectors().transpose();
}

namespace {

double stage_potential(const PotentialSpec& spec, const JointDynamics& dyn,
                       const Vec& x, const Vec& u) {
  double value = 0.0;
  for (int a = 0; a < dyn.num_agents(); ++a) {
    value += tracking_cost(spec.tracking[a], dyn.agent_state(x, a),
                           dyn.agent_control(u, a));
  }
  for (const auto& [i, j] : spec.pairs) {
    value += proximity_cost(spec.coupling, dyn.agent_position(x, i),
                            dyn.agent_position(x, j));
  }
  return value;
}

void check_spec(const PotentialSpec& spec, const JointDynamics& dyn) {
  if (static_cast<int>(spec.tracking.size()) != dyn.num_agents()) {
    throw ConfigError("potential spec covers " +
                      std::to_string(spec.tracking.size()) +
                      " agents, dynamics has " +
                      std::to_string(dyn.num_agents()));
  }
}

}  // namespace

double potential_value(const PotentialSpec& spec, const JointDynamics& dyn,
                       const JointTrajectory& traj) {
  check_spec(spec, dyn);
  const int T = traj.horizon();
  double value = 0.0;
  for (int k = 0; k < T; ++k) {
    value += stage_potential(spec, dyn, traj.states.col(k), traj.controls.col(k));
  }
  for (int a = 0; a < dyn.num_agents(); ++a) {
    value += terminal_tracking_cost(spec.tracking[a],
                                    dyn.agent_state(traj.states.col(T), a));
  }
  return value;
}

double agent_cost(const PotentialSpec& spec, const JointDynamics& dyn,
                  const JointTrajectory& traj, int local_agent) {
  check_spec(spec, dyn);
  const int T = traj.horizon();
  double value = 0.0;
  for (int k = 0; k < T; ++k) {
    const Vec x = traj.states.col(k);
    value += tracking_cost(spec.tracking[local_agent],
                           dyn.agent_state(x, local_agent),
                           dyn.agent_control(traj.controls.col(k), local_agent));
    for (const auto& [i, j] : spec.pairs) {
      if (i == local_agent || j == local_agent) {
        value += proximity_cost(spec.coupling, dyn.agent_position(x, i),
                                dyn.agent_position(x, j));
      }
    }
  }
  value += terminal_tracking_cost(
      spec.tracking[local_agent],
      dyn.agent_state(traj.states.col(T), local_agent));
  return value;
}

StageQuadratic quadraticize_stage(const PotentialSpec& spec,
                                  const JointDynamics& dyn, const Vec& x,
                                  const Vec& u) {
  check_spec(spec, dyn);
  const int n = dyn.state_dim();
  const int m = dyn.control_dim();
  StageQuadratic q;
  q.lx = Vec::Zero(n);
  q.lu = Vec::Zero(m);
  q.lxx = Mat::Zero(n, n);
  q.luu = Mat::Zero(m, m);

  for (int a = 0; a < dyn.num_agents(); ++a) {
    const auto& tc = spec.tracking[a];
    const int xo = dyn.state_offset(a);
    const int uo = dyn.control_offset(a);
    const int nx = dyn.model(a)->state_dim();
    const int nu = dyn.model(a)->control_dim();
    const Vec dx = x.segment(xo, nx) - tc.x_goal;
    const Vec du = u.segment(uo, nu) - tc.u_ref;
    q.lx.segment(xo, nx) += 2.0 * (tc.Q * dx);
    q.lu.segment(uo, nu) += 2.0 * (tc.R * du);
    q.lxx.block(xo, xo, nx, nx) += 2.0 * tc.Q;
    q.luu.block(uo, uo, nu, nu) += 2.0 * tc.R;
  }

  for (const auto& [i, j] : spec.pairs) {
    const Vec p_i = dyn.agent_position(x, i);
    const Vec p_j = dyn.agent_position(x, j);
    if ((p_i - p_j).norm() >= spec.coupling.d_prox) continue;

    const int np = static_cast<int>(p_i.size());
    const int oi = dyn.state_offset(i);
    const int oj = dyn.state_offset(j);
    const Vec g = proximity_gradient(spec.coupling, p_i, p_j);
    q.lx.segment(oi, np) += g;
    q.lx.segment(oj, np) -= g;

    const Mat H = proximity_hessian_psd(spec.coupling, p_i, p_j);
    q.lxx.block(oi, oi, np, np) += H;
    q.lxx.block(oj, oj, np, np) += H;
    q.lxx.block(oi, oj, np, np) -= H;
    q.lxx.block(oj, oi, np, np) -= H;
  }
  return q;
}

StageQuadratic quadraticize_terminal(const PotentialSpec& spec,
                                     const JointDynamics& dyn, const Vec& x) {
  check_spec(spec, dyn);
  const int n = dyn.state_dim();
  StageQuadratic q;
  q.lx = Vec::Zero(n);
  q.lxx = Mat::Zero(n, n);
  for (int a = 0; a < dyn.num_agents(); ++a) {
    const auto& tc = spec.tracking[a];
    const int xo = dyn.state_offset(a);
    const int nx = dyn.model(a)->state_dim();
    const Vec dx = x.segment(xo, nx) - tc.x_goal;
    q.lx.segment(xo, nx) += 2.0 * (tc.Qf * dx);
    q.lxx.block(xo, xo, nx, nx) += 2.0 * tc.Qf;
  }
  return q;
}

StageQuadratic quadraticize(const PotentialSpec& spec, const JointDynamics& dyn,
                            const JointTrajectory& traj, int k) {
  const int T = traj.horizon();
  if (k < 0 || k > T) {
    throw ConfigError("quadraticize: stage index out of range");
  }
  if (k == T) return quadraticize_terminal(spec, dyn, traj.states.col(T));
  return quadraticize_stage(spec, dyn, traj.states.col(k),
                            traj.controls.col(k));
}

}  // namespace dpilqr
