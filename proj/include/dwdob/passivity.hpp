#pragma once

// Runtime energy bookkeeping at the robot-environment port.
//
//   E_port(t) = int_0^t f_ext^T xdot dt      (trapezoidal at the control rate)
//   S         = 1/2 xdot^T Lambda_hat xdot
//   rho       = (S - S0) - E_port            rho > 0 flags a passivity violation

#include <string_view>

#include "dwdob/types.hpp"

namespace dwdob {

enum class StopReason { kNone, kForce, kMoment };

std::string_view to_string(StopReason r);

struct SafetyLimits {
  double force_max = 90.0;   // N
  double moment_max = 5.0;   // N*m

  void validate() const;
};

struct EnergyLedger {
  double e_port = 0.0;
  double s0 = 0.0;
  double s_now = 0.0;
  double rho = 0.0;
  bool stopped = false;
  StopReason stop_reason = StopReason::kNone;

  // Trapezoid memory.
  double prev_power = 0.0;
  bool has_prev = false;
  bool has_storage = false;
};

// Adds f_ext^T xdot over one step with the trapezoid rule. The first call
// only records the power sample.
void port_energy_step(EnergyLedger& ledger, const Wrench& f_ext,
                      const Vector& xdot, double dt);

// 1/2 xdot^T Lambda_hat xdot; throws NotPositiveDefinite.
double storage(const Matrix& lambda_hat, const Vector& xdot);

// Records the current storage (the first call also fixes S0) and refreshes rho.
void update_storage(EnergyLedger& ledger, double s);

// (s_now - s0) - e_port.
double passivity_residual(const EnergyLedger& ledger);

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::kNone;
};

// Force part is every component but the last for a 3-dimensional task, the
// whole wrench otherwise. Thresholds are strict: stop only when exceeded.
StopDecision safety_check(const SafetyLimits& limits, const Wrench& f_ext);

// Latches a stop into the ledger. Returns true when stopped after the call.
bool latch_safety(EnergyLedger& ledger, const SafetyLimits& limits,
                  const Wrench& f_ext);

double force_norm(const Wrench& w);
double moment_norm(const Wrench& w);

}  // namespace dwdob
