#pragma once

// Zero-reference wrench controllers: a PD law on the measured external wrench,
// optionally wrapped by a disturbance observer.
//
// Sign convention: f_ext is the wrench the environment applies to the arm, so
// the task-space plant reads  Lambda xddot + mu = f_applied + f_ext (+ d).
//
//   PD      f_c  = -Kp f_ext - Kd H(s) f_ext
//   CWDOB   d    = Q(s) (-f_ext - f_c')                  identity nominal model
//   DW-DOB  r    = Lambda_hat xddot_L - L f_ext - L f_c' inertia in the model
//           d    = Q(s) r
//   both    f_c' = f_c - d,   applied = f_c' + f_ff
//
// The observers see last tick's f_c' (one-sample delay breaks the algebraic
// loop) and the feedforward is counted as part of the command. Disturbance
// compensation is restricted to the regulated axes.

#include <memory>

#include "dwdob/filters.hpp"
#include "dwdob/rigid_body.hpp"

namespace dwdob {

struct PdGains {
  Vector kp;  // diagonal, dimensionless
  Vector kd;  // diagonal, s

  void validate() const;

  // True when any kp entry exceeds 1 (outside 0 <= Kp <= I).
  bool exceeds_unity() const;
};

// Gain sets for the (x, y, theta) task; a 2-dimensional task keeps (x, y).
PdGains gain_set_a(int task_dim);
PdGains gain_set_b(int task_dim);

Wrench pd_wrench(const Wrench& f_ext, const Wrench& f_ext_dot,
                 const PdGains& gains);

// Lambda_hat = (1 + lambda_scale) Lambda + lambda_offset.
struct MismatchConfig {
  double lambda_scale = 0.0;
  Matrix lambda_offset;  // empty for none; must be symmetric

  void validate() const;
  Matrix apply(const Matrix& lambda) const;
};

struct ObserverState {
  explicit ObserverState(const CompositeFilter& composite, int task_dim);

  FilterState q_filter;
  WrenchPath ext_path;
  WrenchPath cmd_path;
  AccelerationPath accel_path;
  Wrench d_hat;
  Wrench last_commanded;
};

// d_cw = Q(-f_ext - f_c'), with f_c' taken from state.last_commanded.
Wrench cwdob_step(ObserverState& state, const Wrench& f_ext,
                  const FilterParams& q_params);

// r = Lambda_hat xddot - L f_ext - L f_c'.
Wrench dwdob_residual(const Matrix& lambda_hat, const Vector& xddot,
                      const Wrench& f_ext_l, const Wrench& f_c_l);

struct DwdobSample {
  Vector xddot;    // filtered acceleration estimate
  Wrench residual; // phase-aligned residual before Q
  Wrench d_hat;
};

// Feeds the pose through the acceleration path and both wrenches through
// L(s), then d_dw = Q(r).
DwdobSample dwdob_step(ObserverState& state, const Matrix& lambda_hat,
                       const Vector& pose, const Wrench& f_ext,
                       const FilterParams& q_params);

enum class ObserverKind { kNone, kContactWrench, kDynamicWrench };

struct ObserverConfig {
  FilterParams q_filter;     // Q(s)
  CompositeFilter composite; // L(s) and the acceleration path
  FilterParams fdot_filter;  // H(s) used for the PD derivative term
  double task_damping = 0.0; // damping for Lambda_hat near singularities

  void validate() const;
};

ObserverConfig default_observer_config(double dt);

struct ControlInput {
  Vector q;            // encoder sample
  Vector pose;         // forward kinematics of q
  Wrench f_ext;        // measured external wrench
  Wrench feedforward;  // constant insertion wrench
  Wrench excitation;   // commanded transient added to f_c
};

struct ControlOutput {
  Wrench f_c;          // PD output plus excitation
  Wrench f_c_prime;    // f_c - d_hat
  Wrench d_hat;
  Wrench applied;      // f_c_prime + feedforward
};

class WrenchController {
 public:
  WrenchController(ObserverKind kind, PdGains gains, Vector regulated,
                   ObserverConfig config, ManipulatorModel model,
                   MismatchConfig mismatch);

  ControlOutput update(const ControlInput& in);

  // Lambda_hat used by the observer and the storage function.
  Matrix lambda_hat(const Vector& q) const;

  ObserverKind kind() const { return kind_; }
  const ObserverState& state() const { return state_; }
  const Vector& regulated() const { return regulated_; }

 private:
  ObserverKind kind_;
  PdGains gains_;
  Vector regulated_;  // 1 on regulated axes, 0 elsewhere
  ObserverConfig config_;
  ManipulatorModel model_;
  MismatchConfig mismatch_;
  FilterState fdot_state_;
  ObserverState state_;
};

}  // namespace dwdob
