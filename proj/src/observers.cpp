#include "dwdob/observers.hpp"

#include <cmath>
#include <string>

namespace dwdob {

namespace {

PdGains table_gains(int task_dim, double kp_force, double kp_moment,
                    double kd_force, double kd_moment) {
  PdGains g;
  g.kp = Vector::Constant(task_dim, kp_force);
  g.kd = Vector::Constant(task_dim, kd_force);
  if (task_dim == 3) {
    g.kp[2] = kp_moment;
    g.kd[2] = kd_moment;
  }
  return g;
}

void require_dim(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw DimensionMismatch(std::string(what) + " has size " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(n));
  }
}

}  // namespace

void PdGains::validate() const {
  if (kp.size() != kd.size() || kp.size() == 0) {
    throw ConfigInvalid("gains", "kp and kd must have the task dimension");
  }
  for (Eigen::Index i = 0; i < kp.size(); ++i) {
    if (!std::isfinite(kp[i])) throw ConfigInvalid("gains.kp", "not finite");
    if (!(kd[i] >= 0.0)) throw ConfigInvalid("gains.kd", "must be >= 0");
  }
}

bool PdGains::exceeds_unity() const { return (kp.array() > 1.0).any(); }

PdGains gain_set_a(int task_dim) {
  return table_gains(task_dim, 0.10, 0.50, 0.01, 0.06);
}

PdGains gain_set_b(int task_dim) {
  return table_gains(task_dim, 1.00, 5.00, 0.01, 0.06);
}

Wrench pd_wrench(const Wrench& f_ext, const Wrench& f_ext_dot,
                 const PdGains& gains) {
  require_dim(f_ext_dot, f_ext.size(), "f_ext_dot");
  require_dim(gains.kp, f_ext.size(), "kp");
  return -(gains.kp.array() * f_ext.array() +
           gains.kd.array() * f_ext_dot.array())
              .matrix();
}

void MismatchConfig::validate() const {
  if (!(lambda_scale >= -0.5 && lambda_scale <= 0.5)) {
    throw ConfigInvalid("mismatch.lambda_scale", "must lie in [-0.5, 0.5]");
  }
  if (lambda_offset.size() != 0) {
    if (lambda_offset.rows() != lambda_offset.cols() ||
        !lambda_offset.isApprox(lambda_offset.transpose())) {
      throw ConfigInvalid("mismatch.lambda_offset", "must be symmetric");
    }
  }
}

Matrix MismatchConfig::apply(const Matrix& lambda) const {
  Matrix out = (1.0 + lambda_scale) * lambda;
  if (lambda_offset.size() != 0) {
    if (lambda_offset.rows() != lambda.rows()) {
      throw DimensionMismatch("lambda_offset does not match the task dimension");
    }
    out += lambda_offset;
  }
  Eigen::LLT<Matrix> llt(out);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("perturbed task inertia is not positive definite");
  }
  return out;
}

ObserverState::ObserverState(const CompositeFilter& composite, int task_dim)
    : ext_path(composite),
      cmd_path(composite),
      accel_path(composite),
      d_hat(Wrench::Zero(task_dim)),
      last_commanded(Wrench::Zero(task_dim)) {}

Wrench cwdob_step(ObserverState& state, const Wrench& f_ext,
                  const FilterParams& q_params) {
  require_dim(f_ext, state.last_commanded.size(), "f_ext");
  state.d_hat = lowpass_step(state.q_filter, q_params,
                             Vector(-f_ext - state.last_commanded));
  return state.d_hat;
}

Wrench dwdob_residual(const Matrix& lambda_hat, const Vector& xddot,
                      const Wrench& f_ext_l, const Wrench& f_c_l) {
  const auto m = lambda_hat.rows();
  if (lambda_hat.cols() != m) {
    throw DimensionMismatch("lambda_hat must be square");
  }
  require_dim(xddot, m, "xddot");
  require_dim(f_ext_l, m, "f_ext_l");
  require_dim(f_c_l, m, "f_c_l");
  return lambda_hat * xddot - f_ext_l - f_c_l;
}

DwdobSample dwdob_step(ObserverState& state, const Matrix& lambda_hat,
                       const Vector& pose, const Wrench& f_ext,
                       const FilterParams& q_params) {
  require_dim(pose, state.last_commanded.size(), "pose");
  require_dim(f_ext, state.last_commanded.size(), "f_ext");
  DwdobSample out;
  out.xddot = state.accel_path.step(pose);
  const Wrench f_ext_l = state.ext_path.step(f_ext);
  const Wrench f_c_l = state.cmd_path.step(state.last_commanded);
  out.residual = dwdob_residual(lambda_hat, out.xddot, f_ext_l, f_c_l);
  state.d_hat = lowpass_step(state.q_filter, q_params, out.residual);
  out.d_hat = state.d_hat;
  return out;
}

void ObserverConfig::validate() const {
  q_filter.validate();
  fdot_filter.validate();
  composite.validate();
  check_same_rate(composite, q_filter);
  check_same_rate(composite, fdot_filter);
  if (!(task_damping >= 0.0)) {
    throw ConfigInvalid("observer.task_damping", "must be >= 0");
  }
}

ObserverConfig default_observer_config(double dt) {
  ObserverConfig c;
  c.q_filter = {hz_to_rad(15.0), dt};
  c.composite = default_composite(dt);
  c.fdot_filter = {hz_to_rad(1.0), dt};
  c.task_damping = 0.0;
  return c;
}

WrenchController::WrenchController(ObserverKind kind, PdGains gains,
                                   Vector regulated, ObserverConfig config,
                                   ManipulatorModel model,
                                   MismatchConfig mismatch)
    : kind_(kind),
      gains_(std::move(gains)),
      regulated_(std::move(regulated)),
      config_(std::move(config)),
      model_(std::move(model)),
      mismatch_(std::move(mismatch)),
      state_(config_.composite, model_.task_dim()) {
  model_.validate();
  gains_.validate();
  config_.validate();
  mismatch_.validate();
  require_dim(gains_.kp, model_.task_dim(), "kp");
  require_dim(regulated_, model_.task_dim(), "regulated");
}

Matrix WrenchController::lambda_hat(const Vector& q) const {
  return mismatch_.apply(task_inertia(model_, q, config_.task_damping));
}

ControlOutput WrenchController::update(const ControlInput& in) {
  const auto m = model_.task_dim();
  require_dim(in.f_ext, m, "f_ext");
  require_dim(in.feedforward, m, "feedforward");
  require_dim(in.excitation, m, "excitation");

  const Wrench f_ext_dot =
      filtered_diff_step(fdot_state_, config_.fdot_filter, in.f_ext);

  ControlOutput out;
  out.f_c = regulated_.cwiseProduct(pd_wrench(in.f_ext, f_ext_dot, gains_)) +
            in.excitation;

  switch (kind_) {
    case ObserverKind::kNone:
      out.d_hat = Wrench::Zero(m);
      break;
    case ObserverKind::kContactWrench:
      out.d_hat = regulated_.cwiseProduct(
          cwdob_step(state_, in.f_ext, config_.q_filter));
      break;
    case ObserverKind::kDynamicWrench:
      out.d_hat = regulated_.cwiseProduct(
          dwdob_step(state_, lambda_hat(in.q), in.pose, in.f_ext,
                     config_.q_filter)
              .d_hat);
      break;
  }
  state_.d_hat = out.d_hat;

  out.f_c_prime = out.f_c - out.d_hat;
  out.applied = out.f_c_prime + in.feedforward;
  state_.last_commanded = out.applied;
  return out;
}

}  // namespace dwdob
