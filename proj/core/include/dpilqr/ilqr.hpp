#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "dpilqr/costs.hpp"
#include "dpilqr/dynamics.hpp"
#include "dpilqr/types.hpp"

namespace dpilqr {

struct SolverOptions {
  int max_iterations = 50;
  /// Converged when the relative cost decrease of an accepted step falls
  /// below this.
  double convergence_tol = 1e-4;
  /// Control-space regularization mu: added to Q_uu, grown on failure,
  /// halved on success.
  double reg_init = 1e-6;
  double reg_growth = 10.0;
  double reg_max = 1e6;
  /// Backtracking steps: alpha = 1, 1/2, ..., 1/2^(line_search_steps-1).
  int line_search_steps = 11;
  /// Wall-clock budget; when exceeded the best iterate so far is returned
  /// with converged = false. Checked once per iteration.
  std::optional<double> time_budget_s;
  /// Optional externally imposed deadline (receding-horizon shared budgets);
  /// behaves like time_budget_s but measured against an absolute instant.
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct SolveReport {
  Mat controls;
  JointTrajectory trajectory;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_time_s = 0.0;
  /// Residual stationarity measure sqrt(sum_k |Q_u_k|^2) from the last
  /// backward pass; diagnostics only.
  double gradient_norm = 0.0;
  std::string diagnostic;
};

/// Result of one Riccati sweep: feedforward k, feedback K per stage, and
/// the coefficients of the predicted cost change
///   dJ(alpha) = alpha * dv1 + alpha^2/2 * dv2.
struct BackwardPass {
  std::vector<Vec> k;
  std::vector<Mat> K;
  double dv1 = 0.0;
  double dv2 = 0.0;
  double gradient_norm = 0.0;
  bool ok = false;
};

/// Riccati recursion over linearized dynamics and quadraticized stage costs.
/// `stages` has T+1 entries; the last is terminal (lx/lxx only). Fails
/// (ok = false) if any regularized Q_uu is not positive definite.
BackwardPass backward_pass(const std::vector<Mat>& A, const std::vector<Mat>& B,
                           const std::vector<StageQuadratic>& stages,
                           double mu);

/// Minimize the potential over controls starting from u_init (pass an empty
/// matrix for the zero/neutral initialization). Iterates rollout,
/// linearization, Riccati sweep, and a backtracking line search until the
/// relative cost decrease drops below tolerance or budgets expire.
SolveReport solve(const JointDynamics& dyn, const PotentialSpec& spec,
                  const Vec& x0, double dt, const Mat& u_init,
                  const SolverOptions& opts);

/// First-order equilibrium test: perturb one agent's control sequence at a
/// time by random directions of norm epsilon and measure the change in that
/// agent's individual cost. Returns the most negative observed
/// (J_i(perturbed) - J_i(candidate)) / epsilon over all agents and
/// directions; values >= -c*epsilon certify approximate stationarity.
double nash_stationarity_check(const JointDynamics& dyn,
                               const PotentialSpec& spec, const Vec& x0,
                               double dt, const Mat& u_star, double epsilon,
                               int directions_per_agent, std::uint64_t seed);

}  // namespace dpilqr
