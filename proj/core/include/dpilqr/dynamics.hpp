#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpilqr/types.hpp"

namespace dpilqr {

/// Per-dimension control limits. Unbounded dimensions use +/- infinity.
struct ControlBounds {
  Vec lower;
  Vec upper;
};

/// Discrete-time dynamics of a single agent. Models are immutable after
/// construction and safe to share across threads. `step` depends only on
/// the agent's own state and control; joint behavior is block-diagonal.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  const std::string& name() const { return name_; }
  int state_dim() const { return state_dim_; }
  int control_dim() const { return control_dim_; }
  int position_dim() const { return position_dim_; }

  /// Workspace position lives in the leading `position_dim()` state coords.
  Vec position_of(const Vec& x) const { return x.head(position_dim_); }

  virtual Vec step(const Vec& x, const Vec& u, double dt) const = 0;

  /// A = d(step)/dx, B = d(step)/du at (x, u). Analytic; validated against
  /// central finite differences in the test suite.
  virtual void jacobians(const Vec& x, const Vec& u, double dt, Mat& A,
                         Mat& B) const = 0;

  /// Control that holds the equilibrium manifold (zero except hover thrust).
  virtual Vec neutral_control() const { return Vec::Zero(control_dim_); }

  const std::optional<ControlBounds>& control_bounds() const {
    return bounds_;
  }
  Vec clamp(const Vec& u) const {
    if (!bounds_) return u;
    return u.cwiseMax(bounds_->lower).cwiseMin(bounds_->upper);
  }

  virtual std::vector<std::string> state_names() const = 0;
  virtual std::vector<std::string> control_names() const = 0;

 protected:
  DynamicsModel(std::string name, int nx, int nu, int np)
      : name_(std::move(name)),
        state_dim_(nx),
        control_dim_(nu),
        position_dim_(np) {}

  std::string name_;
  int state_dim_;
  int control_dim_;
  int position_dim_;
  std::optional<ControlBounds> bounds_;
};

using ModelPtr = std::shared_ptr<const DynamicsModel>;

/// Planar double integrator, state (px, py, vx, vy), control (ax, ay).
/// Exact zero-order-hold discretization; A and B are constant.
ModelPtr double_integrator_2d();

/// Planar unicycle, state (px, py, theta, v), control (omega, accel).
/// RK4 discretization with analytic Jacobians through the stages.
ModelPtr unicycle_2d();

/// Six-state quadcopter, state (px, py, pz, vx, vy, vz), control
/// (pitch, roll, thrust): vdot_x = g tan(pitch), vdot_y = -g tan(roll),
/// vdot_z = thrust - g. RK4 discretization. Pitch and roll are bounded by
/// max_tilt to stay clear of the tangent singularity.
ModelPtr quadcopter_6d(double gravity = 9.81, double max_tilt = 0.3);

/// Lookup by the scenario-file key: "double_integrator", "unicycle", "quad6d".
ModelPtr make_model(const std::string& key);

/// Fixed ordering of per-agent models with concatenated state/control
/// layout. All joint vectors are ordered by agent index.
class JointDynamics {
 public:
  explicit JointDynamics(std::vector<ModelPtr> models);

  int num_agents() const { return static_cast<int>(models_.size()); }
  int state_dim() const { return state_dim_; }
  int control_dim() const { return control_dim_; }

  const ModelPtr& model(int i) const { return models_[i]; }
  const std::vector<ModelPtr>& models() const { return models_; }

  int state_offset(int i) const { return state_offsets_[i]; }
  int control_offset(int i) const { return control_offsets_[i]; }

  Vec agent_state(const Vec& x, int i) const {
    return x.segment(state_offsets_[i], models_[i]->state_dim());
  }
  Vec agent_control(const Vec& u, int i) const {
    return u.segment(control_offsets_[i], models_[i]->control_dim());
  }
  Vec agent_position(const Vec& x, int i) const {
    return x.segment(state_offsets_[i], models_[i]->position_dim());
  }

  Vec concat_states(const std::vector<Vec>& per_agent) const;
  std::vector<Vec> split_state(const Vec& x) const;

  /// Clamp each agent's block to its control bounds.
  Vec clamp(const Vec& u) const;

  /// One joint step: per-agent `step` applied blockwise, controls clamped
  /// to bounds first.
  Vec step(const Vec& x, const Vec& u, double dt) const;

  /// Block-diagonal linearization at (x, u).
  void jacobians(const Vec& x, const Vec& u, double dt, Mat& A, Mat& B) const;

  /// Neutral controls of all agents stacked, replicated over `horizon` steps.
  Mat neutral_controls(int horizon) const;

 private:
  std::vector<ModelPtr> models_;
  std::vector<int> state_offsets_;
  std::vector<int> control_offsets_;
  int state_dim_ = 0;
  int control_dim_ = 0;
};

/// Forward simulation from x0 under the control sequence U (one column per
/// step). Controls are clamped to bounds before integration; the returned
/// trajectory stores the clamped controls so it is exactly reproducible.
JointTrajectory rollout(const JointDynamics& dyn, const Vec& x0, const Mat& U,
                        double dt);

}  // namespace dpilqr
