#pragma once

// Planar peg-in-hole world with penalty contact, and the fixed-step closed
// loop that couples arm, contact and controller.
//
// Frames: the hole opening is centred at geom.center with the hole running
// along -y. The task point of the arm is the centre of the peg tip; the peg
// extends peg_length back along the last link. Tilt is theta + pi/2, so a
// peg pointing straight down has zero tilt.

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "dwdob/observers.hpp"
#include "dwdob/passivity.hpp"
#include "dwdob/rigid_body.hpp"

namespace dwdob {

struct HoleGeometry {
  double width = 0.0202;           // m, opening
  double depth = 0.030;            // m
  double peg_width = 0.020;        // m
  double peg_length = 0.060;       // m
  double chamfer = 0.0005;         // m, 45 degree lead-in
  double wall_stiffness = 1e5;     // N/m
  double wall_damping = 20.0;      // N*s/m
  double friction_coeff = 0.3;     // Coulomb, regularized
  double friction_velocity = 1e-4; // m/s
  Eigen::Vector2d center{-0.216, -0.341};

  double clearance() const { return width - peg_width; }
  void validate() const;
};

HoleGeometry nominal_hole();
// Real H7/h6 clearance with a stiffer wall.
HoleGeometry tight_hole();

struct ContactPoint {
  Eigen::Vector2d point;       // world position of the contact
  Eigen::Vector2d normal;      // unit direction of the normal force on the peg
  double penetration = 0.0;    // m
  double normal_force = 0.0;   // N, >= 0
  Eigen::Vector2d force;       // total force on the peg, N
};

struct ContactResult {
  Wrench wrench;                    // on the peg at the task point
  std::vector<ContactPoint> points;
  double spring_energy = 0.0;       // sum of 1/2 k delta^2
};

ContactResult evaluate_contacts(const Vector& peg_pose, const Vector& peg_vel,
                                const HoleGeometry& geom);

// Wrench the hole applies to the peg, expressed at the peg tip with
// base-aligned axes: (fx, fy, moment) for a 3-dimensional pose, (fx, fy)
// for a 2-dimensional one (peg held upright).
Wrench contact_wrench(const Vector& peg_pose, const Vector& peg_vel,
                      const HoleGeometry& geom);

// Tip depth below the hole opening (positive inside the hole).
double insertion_depth(const Vector& peg_pose, const HoleGeometry& geom);

// A commanded wrench transient, A sin(2 pi (t - start) / period) on one axis
// for `cycles` full periods.
struct Excitation {
  int axis = 0;
  double amplitude = 0.0;
  double start = 0.0;
  double period = 0.1;
  int cycles = 0;

  bool active() const { return cycles > 0 && amplitude != 0.0; }
  Wrench at(double t, int task_dim) const;
};

struct SimConfig {
  double control_dt = 1e-3;
  int physics_substeps = 10;
  double duration = 3.0;
  Wrench feedforward;     // constant, insertion axis
  Vector initial_pose;    // task pose including tilt
  double elbow_sign = 1.0;
  double sensor_noise_std = 0.0;         // N, force components
  double sensor_moment_noise_std = 0.0;  // N*m, moment component
  Excitation excitation;
  bool with_contact = true;
  // Weight p of an optional observer storage 1/2 p |d_hat|^2 added to S.
  double observer_storage_weight = 0.0;

  void validate(int task_dim) const;
};

struct TickRecord {
  double t = 0.0;
  Vector q;
  Vector qdot;
  Vector pose;
  Vector xdot;
  Wrench f_ext;      // measured
  Wrench f_c;
  Wrench f_c_prime;
  Wrench applied;
  Wrench d_hat;
  double depth = 0.0;
  double e_port = 0.0;
  double storage = 0.0;
  double rho = 0.0;
  bool stopped = false;
};

struct Trace {
  int dof = 0;
  int task_dim = 0;
  double dt = 0.0;
  std::vector<TickRecord> ticks;
  bool stopped = false;
  StopReason stop_reason = StopReason::kNone;
};

// One closed-loop world: plant state, contact, controller and ledger.
class ClosedLoopSim {
 public:
  ClosedLoopSim(ManipulatorModel plant, HoleGeometry geom, SimConfig config,
                WrenchController controller, SafetyLimits limits,
                std::uint64_t seed);

  // One control tick: sample sensors, run the controller, integrate the
  // plant over the physics substeps, and return the record of the tick.
  // After a safety stop the record is marked and the world no longer moves.
  TickRecord step();

  // Steps until the duration elapses or the safety monitor trips.
  Trace run();

  // Externally applied wrench on the tip for tests of the bare plant; added
  // to the contact wrench during integration and reported as f_ext.
  void set_external_push(Wrench push) { push_ = std::move(push); }

  double time() const { return tick_ * config_.control_dt; }
  std::int64_t tick() const { return tick_; }
  const JointState& state() const { return state_; }
  const EnergyLedger& ledger() const { return ledger_; }
  bool stopped() const { return ledger_.stopped; }
  const WrenchController& controller() const { return controller_; }

 private:
  Wrench environment_wrench(const JointState& s) const;

  ManipulatorModel plant_;
  HoleGeometry geom_;
  SimConfig config_;
  WrenchController controller_;
  SafetyLimits limits_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};

  JointState state_;
  EnergyLedger ledger_;
  std::int64_t tick_ = 0;
  Wrench push_;
  ControlOutput last_output_;
};

}  // namespace dwdob
