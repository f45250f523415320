#include "dpilqr/ilqr.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace dpilqr {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool budget_exceeded(const SolverOptions& opts, Clock::time_point start) {
  if (opts.time_budget_s && seconds_since(start) >= *opts.time_budget_s) {
    return true;
  }
  if (opts.deadline && Clock::now() >= *opts.deadline) return true;
  return false;
}

// Armijo acceptance on the predicted quadratic decrease.
constexpr double kLineSearchAccept = 1e-4;
// Predicted decrease below this (relative) means the gradient is numerically
// zero; stop and report convergence.
constexpr double kStationaryTol = 1e-12;

struct Linearization {
  std::vector<Mat> A;
  std::vector<Mat> B;
  std::vector<StageQuadratic> stages;
};

Linearization linearize(const JointDynamics& dyn, const PotentialSpec& spec,
                        const JointTrajectory& traj, double dt) {
  const int T = traj.horizon();
  Linearization lin;
  lin.A.resize(T);
  lin.B.resize(T);
  lin.stages.reserve(T + 1);
  for (int k = 0; k < T; ++k) {
    dyn.jacobians(traj.states.col(k), traj.controls.col(k), dt, lin.A[k],
                  lin.B[k]);
    lin.stages.push_back(quadraticize_stage(spec, dyn, traj.states.col(k),
                                            traj.controls.col(k)));
  }
  lin.stages.push_back(
      quadraticize_terminal(spec, dyn, traj.states.col(T)));
  return lin;
}

}  // namespace

BackwardPass backward_pass(const std::vector<Mat>& A, const std::vector<Mat>& B,
                           const std::vector<StageQuadratic>& stages,
                           double mu) {
  const int T = static_cast<int>(A.size());
  if (static_cast<int>(stages.size()) != T + 1) {
    throw ConfigError("backward_pass: need T+1 stage quadratics");
  }
  BackwardPass bp;
  bp.k.resize(T);
  bp.K.resize(T);

  Vec Vx = stages[T].lx;
  Mat Vxx = stages[T].lxx;
  double grad_sq = 0.0;

  for (int k = T - 1; k >= 0; --k) {
    const Mat& Ak = A[k];
    const Mat& Bk = B[k];
    const StageQuadratic& st = stages[k];

    const Vec Qx = st.lx + Ak.transpose() * Vx;
    const Vec Qu = st.lu + Bk.transpose() * Vx;
    const Mat Qxx = st.lxx + Ak.transpose() * Vxx * Ak;
    const Mat Qux = Bk.transpose() * Vxx * Ak;
    Mat Quu = st.luu + Bk.transpose() * Vxx * Bk;
    Quu = 0.5 * (Quu + Quu.transpose());

    const int m = static_cast<int>(Quu.rows());
    const Mat Quu_reg = Quu + mu * Mat::Identity(m, m);
    Eigen::LLT<Mat> llt(Quu_reg);
    if (llt.info() != Eigen::Success) {
      bp.ok = false;
      return bp;
    }

    bp.k[k] = -llt.solve(Qu);
    bp.K[k] = -llt.solve(Qux);

    bp.dv1 += bp.k[k].dot(Qu);
    bp.dv2 += bp.k[k].dot(Quu_reg * bp.k[k]);
    grad_sq += Qu.squaredNorm();

    Vx = Qx + bp.K[k].transpose() * Quu_reg * bp.k[k] +
         bp.K[k].transpose() * Qu + Qux.transpose() * bp.k[k];
    Vxx = Qxx + bp.K[k].transpose() * Quu_reg * bp.K[k] +
          bp.K[k].transpose() * Qux + Qux.transpose() * bp.K[k];
    Vxx = 0.5 * (Vxx + Vxx.transpose());
  }

  bp.gradient_norm = std::sqrt(grad_sq);
  bp.ok = true;
  return bp;
}

namespace {

JointTrajectory forward_pass(const JointDynamics& dyn,
                             const JointTrajectory& nominal,
                             const BackwardPass& bp, double alpha, double dt) {
  const int T = nominal.horizon();
  JointTrajectory out;
  out.states.resize(dyn.state_dim(), T + 1);
  out.controls.resize(dyn.control_dim(), T);
  out.states.col(0) = nominal.states.col(0);
  for (int k = 0; k < T; ++k) {
    const Vec dx = out.states.col(k) - nominal.states.col(k);
    const Vec u = nominal.controls.col(k) + alpha * bp.k[k] + bp.K[k] * dx;
    out.controls.col(k) = dyn.clamp(u);
    out.states.col(k + 1) = dyn.step(out.states.col(k), out.controls.col(k), dt);
    if (!out.states.col(k + 1).allFinite()) {
      // Flag via NaN cost downstream; caller rejects the step.
      out.states.rightCols(T - k).setConstant(
          std::numeric_limits<double>::quiet_NaN());
      return out;
    }
  }
  return out;
}

void check_finite_rollout(const JointTrajectory& traj) {
  const int T = traj.horizon();
  for (int k = 0; k <= T; ++k) {
    if (!traj.states.col(k).allFinite()) {
      throw NumericalError("non-finite state at stage " + std::to_string(k) +
                           " of the initial rollout");
    }
  }
}

}  // namespace

SolveReport solve(const JointDynamics& dyn, const PotentialSpec& spec,
                  const Vec& x0, double dt, const Mat& u_init,
                  const SolverOptions& opts) {
  const auto start = Clock::now();
  if (opts.convergence_tol <= 0.0) {
    throw ConfigError("solver: convergence tolerance must be positive");
  }
  if (opts.time_budget_s && *opts.time_budget_s <= 0.0) {
    throw ConfigError("solver: time budget must be positive");
  }

  Mat U = u_init;
  if (U.size() == 0) {
    throw ConfigError("solver: empty initial control sequence");
  }
  if (U.rows() != dyn.control_dim()) {
    throw ConfigError("solver: control rows do not match dynamics");
  }

  JointTrajectory traj = rollout(dyn, x0, U, dt);
  check_finite_rollout(traj);
  U = traj.controls;  // clamped
  double cost = potential_value(spec, dyn, traj);
  if (!std::isfinite(cost)) {
    throw NumericalError("non-finite cost on the initial rollout");
  }

  SolveReport report;
  double mu = opts.reg_init;
  const auto bump_mu = [&]() { mu = (mu <= 0.0) ? 1e-6 : mu * opts.reg_growth; };

  bool converged = false;
  double gradient_norm = 0.0;
  int iterations = 0;
  std::string diagnostic;

  while (iterations < opts.max_iterations) {
    if (budget_exceeded(opts, start)) {
      diagnostic = "time budget exhausted";
      break;
    }

    const Linearization lin = linearize(dyn, spec, traj, dt);

    BackwardPass bp;
    while (true) {
      bp = backward_pass(lin.A, lin.B, lin.stages, mu);
      if (bp.ok) break;
      bump_mu();
      if (mu > opts.reg_max) {
        throw NumericalError(
            "backward pass failed at maximum regularization; weights are "
            "ill-conditioned");
      }
    }
    gradient_norm = bp.gradient_norm;

    // Full-step predicted decrease; a numerically zero value means the
    // iterate is stationary.
    const double predicted_full = -(bp.dv1 + 0.5 * bp.dv2);
    if (predicted_full <= kStationaryTol * std::max(1.0, std::abs(cost))) {
      converged = true;
      ++iterations;
      break;
    }

    bool accepted = false;
    double alpha = 1.0;
    for (int ls = 0; ls < opts.line_search_steps; ++ls, alpha *= 0.5) {
      const JointTrajectory cand = forward_pass(dyn, traj, bp, alpha, dt);
      if (!cand.states.allFinite()) continue;
      const double cand_cost = potential_value(spec, dyn, cand);
      if (!std::isfinite(cand_cost)) continue;
      const double predicted = -(alpha * bp.dv1 + 0.5 * alpha * alpha * bp.dv2);
      const double actual = cost - cand_cost;
      if (predicted > 0.0 && actual >= kLineSearchAccept * predicted) {
        const double rel_decrease = actual / std::max(1.0, std::abs(cost));
        traj = cand;
        U = cand.controls;
        cost = cand_cost;
        accepted = true;
        ++iterations;
        mu *= 0.5;
        if (rel_decrease < opts.convergence_tol) converged = true;
        break;
      }
    }

    if (!accepted) {
      bump_mu();
      if (mu > opts.reg_max) {
        diagnostic = "line search failed at maximum regularization";
        break;
      }
      continue;
    }
    if (converged) break;
  }

  if (!converged && iterations >= opts.max_iterations) {
    diagnostic = "iteration budget exhausted";
  }

  report.controls = U;
  report.trajectory = std::move(traj);
  report.cost = cost;
  report.iterations = iterations;
  report.converged = converged;
  report.gradient_norm = gradient_norm;
  report.diagnostic = diagnostic;
  report.wall_time_s = seconds_since(start);
  return report;
}

double nash_stationarity_check(const JointDynamics& dyn,
                               const PotentialSpec& spec, const Vec& x0,
                               double dt, const Mat& u_star, double epsilon,
                               int directions_per_agent, std::uint64_t seed) {
  const int T = static_cast<int>(u_star.cols());
  const JointTrajectory base = rollout(dyn, x0, u_star, dt);
  Rng rng(seed);

  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dyn.num_agents(); ++i) {
    const double base_cost = agent_cost(spec, dyn, base, i);
    const int mo = dyn.control_offset(i);
    const int mi = dyn.model(i)->control_dim();
    for (int s = 0; s < directions_per_agent; ++s) {
      Mat delta = Mat::Zero(mi, T);
      for (int k = 0; k < T; ++k) delta.col(k) = rng.normal_vector(mi);
      const double nrm = delta.norm();
      if (nrm == 0.0) continue;
      delta *= epsilon / nrm;

      Mat u_pert = u_star;
      u_pert.middleRows(mo, mi) += delta;
      const JointTrajectory pert = rollout(dyn, x0, u_pert, dt);
      const double diff = agent_cost(spec, dyn, pert, i) - base_cost;
      worst = std::min(worst, diff / epsilon);
    }
  }
  return worst;
}

}  // namespace dpilqr
