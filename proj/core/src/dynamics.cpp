#include "dpilqr/dynamics.hpp"

#include <cmath>
#include <limits>

namespace dpilqr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class DoubleIntegrator2d final : public DynamicsModel {
 public:
  DoubleIntegrator2d() : DynamicsModel("double_integrator", 4, 2, 2) {}

  Vec step(const Vec& x, const Vec& u, double dt) const override {
    Vec next(4);
    next[0] = x[0] + x[2] * dt + 0.5 * u[0] * dt * dt;
    next[1] = x[1] + x[3] * dt + 0.5 * u[1] * dt * dt;
    next[2] = x[2] + u[0] * dt;
    next[3] = x[3] + u[1] * dt;
    return next;
  }

  void jacobians(const Vec&, const Vec&, double dt, Mat& A,
                 Mat& B) const override {
    A = Mat::Identity(4, 4);
    A(0, 2) = dt;
    A(1, 3) = dt;
    B = Mat::Zero(4, 2);
    B(0, 0) = 0.5 * dt * dt;
    B(1, 1) = 0.5 * dt * dt;
    B(2, 0) = dt;
    B(3, 1) = dt;
  }

  std::vector<std::string> state_names() const override {
    return {"px", "py", "vx", "vy"};
  }
  std::vector<std::string> control_names() const override {
    return {"ax", "ay"};
  }
};

/// Continuous-time model with analytic derivatives, discretized by RK4
/// with the chain rule carried through the stages.
class Rk4Model : public DynamicsModel {
 public:
  using DynamicsModel::DynamicsModel;

  Vec step(const Vec& x, const Vec& u, double dt) const override {
    const Vec k1 = f(x, u);
    const Vec k2 = f(x + 0.5 * dt * k1, u);
    const Vec k3 = f(x + 0.5 * dt * k2, u);
    const Vec k4 = f(x + dt * k3, u);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  void jacobians(const Vec& x, const Vec& u, double dt, Mat& A,
                 Mat& B) const override {
    const int n = state_dim_;
    const Mat I = Mat::Identity(n, n);

    const Vec k1 = f(x, u);
    const Vec x2 = x + 0.5 * dt * k1;
    const Vec k2 = f(x2, u);
    const Vec x3 = x + 0.5 * dt * k2;
    const Vec k3 = f(x3, u);
    const Vec x4 = x + dt * k3;

    Mat fx1, fu1, fx2, fu2, fx3, fu3, fx4, fu4;
    df(x, u, fx1, fu1);
    df(x2, u, fx2, fu2);
    df(x3, u, fx3, fu3);
    df(x4, u, fx4, fu4);

    const Mat dk1x = fx1;
    const Mat dk2x = fx2 * (I + 0.5 * dt * dk1x);
    const Mat dk3x = fx3 * (I + 0.5 * dt * dk2x);
    const Mat dk4x = fx4 * (I + dt * dk3x);
    A = I + (dt / 6.0) * (dk1x + 2.0 * dk2x + 2.0 * dk3x + dk4x);

    const Mat dk1u = fu1;
    const Mat dk2u = fu2 + 0.5 * dt * fx2 * dk1u;
    const Mat dk3u = fu3 + 0.5 * dt * fx3 * dk2u;
    const Mat dk4u = fu4 + dt * fx4 * dk3u;
    B = (dt / 6.0) * (dk1u + 2.0 * dk2u + 2.0 * dk3u + dk4u);
  }

 protected:
  virtual Vec f(const Vec& x, const Vec& u) const = 0;
  virtual void df(const Vec& x, const Vec& u, Mat& fx, Mat& fu) const = 0;
};

class Unicycle2d final : public Rk4Model {
 public:
  Unicycle2d() : Rk4Model("unicycle", 4, 2, 2) {}

  std::vector<std::string> state_names() const override {
    return {"px", "py", "theta", "v"};
  }
  std::vector<std::string> control_names() const override {
    return {"omega", "accel"};
  }

 protected:
  // state (px, py, theta, v), control (omega, accel)
  Vec f(const Vec& x, const Vec& u) const override {
    Vec xdot(4);
    xdot[0] = x[3] * std::cos(x[2]);
    xdot[1] = x[3] * std::sin(x[2]);
    xdot[2] = u[0];
    xdot[3] = u[1];
    return xdot;
  }

  void df(const Vec& x, const Vec&, Mat& fx, Mat& fu) const override {
    const double c = std::cos(x[2]);
    const double s = std::sin(x[2]);
    fx = Mat::Zero(4, 4);
    fx(0, 2) = -x[3] * s;
    fx(0, 3) = c;
    fx(1, 2) = x[3] * c;
    fx(1, 3) = s;
    fu = Mat::Zero(4, 2);
    fu(2, 0) = 1.0;
    fu(3, 1) = 1.0;
  }
};

class Quadcopter6d final : public Rk4Model {
 public:
  Quadcopter6d(double gravity, double max_tilt)
      : Rk4Model("quad6d", 6, 3, 3), g_(gravity) {
    if (gravity <= 0.0) {
      throw ConfigError("quadcopter_6d: gravity must be positive");
    }
    if (max_tilt >= M_PI / 2.0 || max_tilt <= 0.0) {
      throw ConfigError(
          "quadcopter_6d: max tilt must lie in (0, pi/2) to keep tan() "
          "well-defined");
    }
    ControlBounds b;
    b.lower = Vec(3);
    b.upper = Vec(3);
    b.lower << -max_tilt, -max_tilt, -kInf;
    b.upper << max_tilt, max_tilt, kInf;
    bounds_ = b;
  }

  Vec neutral_control() const override {
    Vec u = Vec::Zero(3);
    u[2] = g_;  // hover thrust
    return u;
  }

  std::vector<std::string> state_names() const override {
    return {"px", "py", "pz", "vx", "vy", "vz"};
  }
  std::vector<std::string> control_names() const override {
    return {"pitch", "roll", "thrust"};
  }

 protected:
  // state (px, py, pz, vx, vy, vz), control (pitch, roll, thrust)
  Vec f(const Vec& x, const Vec& u) const override {
    Vec xdot(6);
    xdot[0] = x[3];
    xdot[1] = x[4];
    xdot[2] = x[5];
    xdot[3] = g_ * std::tan(u[0]);
    xdot[4] = -g_ * std::tan(u[1]);
    xdot[5] = u[2] - g_;
    return xdot;
  }

  void df(const Vec&, const Vec& u, Mat& fx, Mat& fu) const override {
    fx = Mat::Zero(6, 6);
    fx(0, 3) = 1.0;
    fx(1, 4) = 1.0;
    fx(2, 5) = 1.0;
    fu = Mat::Zero(6, 3);
    const double sec_p = 1.0 / std::cos(u[0]);
    const double sec_r = 1.0 / std::cos(u[1]);
    fu(3, 0) = g_ * sec_p * sec_p;
    fu(4, 1) = -g_ * sec_r * sec_r;
    fu(5, 2) = 1.0;
  }

 private:
  double g_;
};

}  // namespace

ModelPtr double_integrator_2d() {
  static const auto model = std::make_shared<const DoubleIntegrator2d>();
  return model;
}

ModelPtr unicycle_2d() {
  static const auto model = std::make_shared<const Unicycle2d>();
  return model;
}

ModelPtr quadcopter_6d(double gravity, double max_tilt) {
  return std::make_shared<const Quadcopter6d>(gravity, max_tilt);
}

ModelPtr make_model(const std::string& key) {
  if (key == "double_integrator") return double_integrator_2d();
  if (key == "unicycle") return unicycle_2d();
  if (key == "quad6d") return quadcopter_6d();
  throw ConfigError("unknown model '" + key +
                    "' (expected one of: double_integrator, unicycle, "
                    "quad6d)");
}

JointDynamics::JointDynamics(std::vector<ModelPtr> models)
    : models_(std::move(models)) {
  if (models_.empty()) {
    throw ConfigError("JointDynamics requires at least one agent");
  }
  state_offsets_.reserve(models_.size());
  control_offsets_.reserve(models_.size());
  for (const auto& m : models_) {
    state_offsets_.push_back(state_dim_);
    control_offsets_.push_back(control_dim_);
    state_dim_ += m->state_dim();
    control_dim_ += m->control_dim();
  }
}

Vec JointDynamics::concat_states(const std::vector<Vec>& per_agent) const {
  if (static_cast<int>(per_agent.size()) != num_agents()) {
    throw ConfigError("concat_states: expected one state per agent");
  }
  Vec x(state_dim_);
  for (int i = 0; i < num_agents(); ++i) {
    if (per_agent[i].size() != models_[i]->state_dim()) {
      throw ConfigError("concat_states: state dimension mismatch for agent " +
                        std::to_string(i));
    }
    x.segment(state_offsets_[i], models_[i]->state_dim()) = per_agent[i];
  }
  return x;
}

std::vector<Vec> JointDynamics::split_state(const Vec& x) const {
  if (x.size() != state_dim_) {
    throw ConfigError("split_state: joint state dimension mismatch");
  }
  std::vector<Vec> out;
  out.reserve(models_.size());
  for (int i = 0; i < num_agents(); ++i) {
    out.push_back(x.segment(state_offsets_[i], models_[i]->state_dim()));
  }
  return out;
}

Vec JointDynamics::clamp(const Vec& u) const {
  Vec out = u;
  for (int i = 0; i < num_agents(); ++i) {
    const auto& m = models_[i];
    if (m->control_bounds()) {
      out.segment(control_offsets_[i], m->control_dim()) =
          m->clamp(u.segment(control_offsets_[i], m->control_dim()));
    }
  }
  return out;
}

Vec JointDynamics::step(const Vec& x, const Vec& u, double dt) const {
  Vec next(state_dim_);
  for (int i = 0; i < num_agents(); ++i) {
    const auto& m = models_[i];
    next.segment(state_offsets_[i], m->state_dim()) =
        m->step(x.segment(state_offsets_[i], m->state_dim()),
                m->clamp(u.segment(control_offsets_[i], m->control_dim())),
                dt);
  }
  return next;
}

void JointDynamics::jacobians(const Vec& x, const Vec& u, double dt, Mat& A,
                              Mat& B) const {
  A = Mat::Zero(state_dim_, state_dim_);
  B = Mat::Zero(state_dim_, control_dim_);
  Mat Ai, Bi;
  for (int i = 0; i < num_agents(); ++i) {
    const auto& m = models_[i];
    m->jacobians(x.segment(state_offsets_[i], m->state_dim()),
                 m->clamp(u.segment(control_offsets_[i], m->control_dim())),
                 dt, Ai, Bi);
    A.block(state_offsets_[i], state_offsets_[i], m->state_dim(),
            m->state_dim()) = Ai;
    B.block(state_offsets_[i], control_offsets_[i], m->state_dim(),
            m->control_dim()) = Bi;
  }
}

Mat JointDynamics::neutral_controls(int horizon) const {
  Vec u0(control_dim_);
  for (int i = 0; i < num_agents(); ++i) {
    u0.segment(control_offsets_[i], models_[i]->control_dim()) =
        models_[i]->neutral_control();
  }
  return u0.replicate(1, horizon);
}

JointTrajectory rollout(const JointDynamics& dyn, const Vec& x0, const Mat& U,
                        double dt) {
  if (x0.size() != dyn.state_dim()) {
    throw ConfigError("rollout: initial state has dimension " +
                      std::to_string(x0.size()) + ", expected " +
                      std::to_string(dyn.state_dim()));
  }
  if (U.rows() != dyn.control_dim() || U.cols() < 1) {
    throw ConfigError("rollout: control sequence must be " +
                      std::to_string(dyn.control_dim()) +
                      " x T with T >= 1");
  }
  const int T = static_cast<int>(U.cols());
  JointTrajectory traj;
  traj.states.resize(dyn.state_dim(), T + 1);
  traj.controls.resize(dyn.control_dim(), T);
  traj.states.col(0) = x0;
  for (int k = 0; k < T; ++k) {
    traj.controls.col(k) = dyn.clamp(U.col(k));
    traj.states.col(k + 1) = dyn.step(traj.states.col(k), traj.controls.col(k), dt);
  }
  return traj;
}

}  // namespace dpilqr
