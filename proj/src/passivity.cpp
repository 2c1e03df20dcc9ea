#include "dwdob/passivity.hpp"

#include <cmath>

namespace dwdob {

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::kForce:
      return "force";
    case StopReason::kMoment:
      return "moment";
    case StopReason::kNone:
      break;
  }
  return "none";
}

void SafetyLimits::validate() const {
  if (!(force_max > 0.0)) throw ConfigInvalid("limits.force_max", "must be > 0");
  if (!(moment_max > 0.0)) {
    throw ConfigInvalid("limits.moment_max", "must be > 0");
  }
}

void port_energy_step(EnergyLedger& ledger, const Wrench& f_ext,
                      const Vector& xdot, double dt) {
  if (f_ext.size() != xdot.size()) {
    throw DimensionMismatch("f_ext and xdot differ in size");
  }
  const double power = f_ext.dot(xdot);
  if (ledger.has_prev) {
    ledger.e_port += 0.5 * (ledger.prev_power + power) * dt;
  }
  ledger.prev_power = power;
  ledger.has_prev = true;
  ledger.rho = passivity_residual(ledger);
}

double storage(const Matrix& lambda_hat, const Vector& xdot) {
  if (lambda_hat.rows() != xdot.size() || lambda_hat.cols() != xdot.size()) {
    throw DimensionMismatch("lambda_hat and xdot differ in size");
  }
  Eigen::LLT<Matrix> llt(lambda_hat);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("storage needs a positive definite inertia");
  }
  return 0.5 * xdot.dot(lambda_hat * xdot);
}

void update_storage(EnergyLedger& ledger, double s) {
  if (!ledger.has_storage) {
    ledger.s0 = s;
    ledger.has_storage = true;
  }
  ledger.s_now = s;
  ledger.rho = passivity_residual(ledger);
}

double passivity_residual(const EnergyLedger& ledger) {
  return (ledger.s_now - ledger.s0) - ledger.e_port;
}

double force_norm(const Wrench& w) {
  return w.size() == 3 ? w.head<2>().norm() : w.norm();
}

double moment_norm(const Wrench& w) {
  return w.size() == 3 ? std::abs(w[2]) : 0.0;
}

StopDecision safety_check(const SafetyLimits& limits, const Wrench& f_ext) {
  if (force_norm(f_ext) > limits.force_max) {
    return {true, StopReason::kForce};
  }
  if (moment_norm(f_ext) > limits.moment_max) {
    return {true, StopReason::kMoment};
  }
  return {};
}

bool latch_safety(EnergyLedger& ledger, const SafetyLimits& limits,
                  const Wrench& f_ext) {
  if (ledger.stopped) return true;
  const auto d = safety_check(limits, f_ext);
  if (d.stop) {
    ledger.stopped = true;
    ledger.stop_reason = d.reason;
  }
  return ledger.stopped;
}

}  // namespace dwdob
