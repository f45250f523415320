#pragma once

#include <utility>
#include <vector>

#include "dpilqr/dynamics.hpp"
#include "dpilqr/types.hpp"

namespace dpilqr {

/// Quadratic goal-tracking cost of one agent:
///   running  (x - x_goal)' Q (x - x_goal) + (u - u_ref)' R (u - u_ref)
///   terminal (x - x_goal)' Qf (x - x_goal)
/// Q, Qf must be symmetric PSD and R symmetric PD; validated by
/// make_tracking_cost.
struct TrackingCost {
  Mat Q;
  Mat R;
  Mat Qf;
  Vec x_goal;
  Vec u_ref;
};

TrackingCost make_tracking_cost(Mat Q, Mat R, Mat Qf, Vec x_goal, Vec u_ref);

/// Quadratic hinge penalty on pairwise distance:
///   beta * (d - d_prox)^2   when d < d_prox, zero otherwise.
/// Symmetric in its two arguments by construction.
struct ProximityCost {
  double beta;
  double d_prox;
};

/// The objective of one optimal control problem over a set of agents:
/// per-agent tracking plus one proximity term per listed pair. Indices are
/// local to the paired JointDynamics; `agents` records the global ids of
/// the participants for bookkeeping. Each unordered pair appears exactly
/// once.
struct PotentialSpec {
  std::vector<int> agents;
  std::vector<TrackingCost> tracking;
  ProximityCost coupling{0.0, 0.0};
  std::vector<std::pair<int, int>> pairs;  // local indices, first < second
};

/// All agents, all unordered pairs.
PotentialSpec make_centralized_spec(std::vector<TrackingCost> tracking,
                                    const ProximityCost& coupling);

double tracking_cost(const TrackingCost& tc, const Vec& x, const Vec& u);
double terminal_tracking_cost(const TrackingCost& tc, const Vec& x);

double proximity_cost(const ProximityCost& pc, const Vec& p_i, const Vec& p_j);

/// d(cost)/d(p_i); the gradient w.r.t. p_j is its negation. At coincident
/// positions the (undefined) direction falls back to the first coordinate
/// axis.
Vec proximity_gradient(const ProximityCost& pc, const Vec& p_i, const Vec& p_j);

/// Exact Hessian of the hinge w.r.t. the relative position, clamped to PSD
/// by zeroing negative eigenvalues. The full pair Hessian is assembled from
/// this block as [[H, -H], [-H, H]].
Mat proximity_hessian_psd(const ProximityCost& pc, const Vec& p_i,
                          const Vec& p_j);

/// Total objective of `spec` along a trajectory: running stage sums for
/// k = 0..T-1 plus the terminal tracking cost at x_T.
double potential_value(const PotentialSpec& spec, const JointDynamics& dyn,
                       const JointTrajectory& traj);

/// Individual cost of one participant: its own tracking terms plus every
/// proximity term it appears in. Unilateral control changes move this and
/// the potential by the same amount.
double agent_cost(const PotentialSpec& spec, const JointDynamics& dyn,
                  const JointTrajectory& traj, int local_agent);

/// Gradient and Gauss-Newton/PSD-projected Hessian of one stage of the
/// potential. No state-control cross terms arise, so l_ux is identically
/// zero and omitted. For the terminal stage (k == T) only lx/lxx are set.
struct StageQuadratic {
  Vec lx;
  Vec lu;
  Mat lxx;
  Mat luu;
};

StageQuadratic quadraticize_stage(const PotentialSpec& spec,
                                  const JointDynamics& dyn, const Vec& x,
                                  const Vec& u);
StageQuadratic quadraticize_terminal(const PotentialSpec& spec,
                                     const JointDynamics& dyn, const Vec& x);

/// Stage k of a trajectory; k == horizon selects the terminal stage.
StageQuadratic quadraticize(const PotentialSpec& spec, const JointDynamics& dyn,
                            const JointTrajectory& traj, int k);

}  // namespace dpilqr
