#pragma once

// Analytic dynamics of a planar serial arm with point masses at the link tips.
//
// Joint i rotates about the tip of link i-1; link i carries a point mass at
// its tip. The task point is the tip of the last link. For two joints the
// task is (x, y); for three joints it is (x, y, theta) with theta the sum of
// the joint angles. Gravity acts along -y.

#include <vector>

#include "dwdob/types.hpp"

namespace dwdob {

struct ManipulatorModel {
  std::vector<double> link_lengths;   // m
  std::vector<double> link_masses;    // kg, point mass at each link tip
  double gravity = 0.0;               // m/s^2 along -y
  std::vector<double> joint_damping;  // N*m*s/rad

  // Regularized Coulomb joint friction, tau = f * tanh(qdot / v). Not part of
  // the controllers' model; it is the plant disturbance the observers see.
  std::vector<double> joint_friction;      // N*m, empty means none
  double friction_velocity = 1e-3;         // rad/s

  int dof() const { return static_cast<int>(link_lengths.size()); }
  int task_dim() const { return dof(); }

  // Throws ConfigInvalid on a field that breaks the model invariants.
  void validate() const;
};

struct JointState {
  Vector q;
  Vector qdot;
};

struct TaskState {
  Vector x;
  Vector xdot;
  Vector xddot;
};

// Two-link arm with unit lengths and masses, the textbook reference case.
ManipulatorModel unit_two_link();

// Default damping used by the damped task inertia near singularities.
inline constexpr double kDefaultTaskDamping = 1e-3;

Vector forward_kinematics(const ManipulatorModel& model, const Vector& q);
Matrix jacobian(const ManipulatorModel& model, const Vector& q);

// Joint angles placing the task point at `pose`. elbow_sign picks the branch
// (+1 or -1). Throws Error when the pose is out of reach.
Vector inverse_kinematics(const ManipulatorModel& model, const Vector& pose,
                          double elbow_sign = 1.0);

// Jdot * qdot, analytic for both supported arms.
Vector jacobian_dot_qdot(const ManipulatorModel& model, const Vector& q,
                         const Vector& qdot);

Matrix mass_matrix(const ManipulatorModel& model, const Vector& q);

// C(q, qdot) qdot, the Coriolis/centrifugal joint torques.
Vector coriolis_torque(const ManipulatorModel& model, const Vector& q,
                       const Vector& qdot);
Vector gravity_torque(const ManipulatorModel& model, const Vector& q);
Vector friction_torque(const ManipulatorModel& model, const Vector& qdot);

// Lambda = (J M^-1 J^T + damping^2 I)^-1. With damping == 0 a condition number
// of J M^-1 J^T above 1e12 raises SingularTaskInertia.
Matrix task_inertia(const Matrix& jac, const Matrix& mass, double damping = 0.0);
Matrix task_inertia(const ManipulatorModel& model, const Vector& q,
                    double damping = 0.0);

// mu = Lambda (J M^-1 (C qdot + g) - Jdot qdot).
Wrench bias_wrench(const ManipulatorModel& model, const Vector& q,
                   const Vector& qdot, double damping = 0.0);

// qddot = M^-1 (J^T (tau_task + f_ext) - C qdot - g - D qdot - friction).
Vector forward_dynamics(const ManipulatorModel& model, const JointState& state,
                        const Wrench& tau_task, const Wrench& f_ext);

double kinetic_energy(const ManipulatorModel& model, const JointState& state);
double potential_energy(const ManipulatorModel& model, const Vector& q);

// Classic fourth-order Runge-Kutta step of forward_dynamics with constant
// task wrenches over the step.
JointState rk4_step(const ManipulatorModel& model, const JointState& state,
                    const Wrench& tau_task, const Wrench& f_ext, double dt);

// Symplectic (semi-implicit) Euler: qdot first, then q with the new qdot.
JointState semi_implicit_euler_step(const ManipulatorModel& model,
                                    const JointState& state,
                                    const Wrench& tau_task, const Wrench& f_ext,
                                    double dt);

}  // namespace dwdob
