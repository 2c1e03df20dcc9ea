#include "dwdob/rigid_body.hpp"

#include <cmath>
#include <string>

namespace dwdob {

namespace {

// Cumulative absolute link angles phi_k = q_1 + ... + q_k.
Vector absolute_angles(const Vector& q) {
  Vector phi(q.size());
  double acc = 0.0;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    acc += q[k];
    phi[k] = acc;
  }
  return phi;
}

// 2 x n position Jacobian of the point mass at the tip of link `i`.
Matrix point_jacobian(const ManipulatorModel& model, const Vector& phi, int i) {
  const int n = model.dof();
  Matrix jac = Matrix::Zero(2, n);
  for (int j = 0; j <= i; ++j) {
    for (int k = j; k <= i; ++k) {
      jac(0, j) -= model.link_lengths[k] * std::sin(phi[k]);
      jac(1, j) += model.link_lengths[k] * std::cos(phi[k]);
    }
  }
  return jac;
}

// Jdot_i qdot for the point mass at the tip of link `i` (pure centripetal).
Eigen::Vector2d point_jdot_qdot(const ManipulatorModel& model, const Vector& phi,
                                const Vector& phidot, int i) {
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int k = 0; k <= i; ++k) {
    const double w2 = phidot[k] * phidot[k];
    out.x() -= model.link_lengths[k] * std::cos(phi[k]) * w2;
    out.y() -= model.link_lengths[k] * std::sin(phi[k]) * w2;
  }
  return out;
}

void check_size(const Vector& v, int n, const char* what) {
  if (v.size() != n) {
    throw DimensionMismatch(std::string(what) + " has size " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(n));
  }
}

}  // namespace

void ManipulatorModel::validate() const {
  const auto n = link_lengths.size();
  if (n != 2 && n != 3) {
    throw ConfigInvalid("model.link_lengths", "arm must have 2 or 3 links");
  }
  if (link_masses.size() != n) {
    throw ConfigInvalid("model.link_masses", "one mass per link required");
  }
  if (joint_damping.size() != n) {
    throw ConfigInvalid("model.joint_damping", "one value per joint required");
  }
  if (!joint_friction.empty() && joint_friction.size() != n) {
    throw ConfigInvalid("model.joint_friction", "one value per joint required");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(link_lengths[i] > 0.0)) {
      throw ConfigInvalid("model.link_lengths", "lengths must be > 0");
    }
    if (!(link_masses[i] > 0.0)) {
      throw ConfigInvalid("model.link_masses", "masses must be > 0");
    }
    if (!(joint_damping[i] >= 0.0)) {
      throw ConfigInvalid("model.joint_damping", "damping must be >= 0");
    }
    if (!joint_friction.empty() && !(joint_friction[i] >= 0.0)) {
      throw ConfigInvalid("model.joint_friction", "friction must be >= 0");
    }
  }
  if (!std::isfinite(gravity)) {
    throw ConfigInvalid("model.gravity", "must be finite");
  }
  if (!(friction_velocity > 0.0)) {
    throw ConfigInvalid("model.friction_velocity", "must be > 0");
  }
}

ManipulatorModel unit_two_link() {
  ManipulatorModel m;
  m.link_lengths = {1.0, 1.0};
  m.link_masses = {1.0, 1.0};
  m.joint_damping = {0.0, 0.0};
  return m;
}

Vector forward_kinematics(const ManipulatorModel& model, const Vector& q) {
  const int n = model.dof();
  check_size(q, n, "q");
  const Vector phi = absolute_angles(q);
  Vector x = Vector::Zero(model.task_dim());
  for (int k = 0; k < n; ++k) {
    x[0] += model.link_lengths[k] * std::cos(phi[k]);
    x[1] += model.link_lengths[k] * std::sin(phi[k]);
  }
  if (n == 3) x[2] = phi[2];
  return x;
}

Matrix jacobian(const ManipulatorModel& model, const Vector& q) {
  const int n = model.dof();
  check_size(q, n, "q");
  const Vector phi = absolute_angles(q);
  Matrix jac(model.task_dim(), n);
  jac.topRows(2) = point_jacobian(model, phi, n - 1);
  if (n == 3) jac.row(2).setOnes();
  return jac;
}

Vector inverse_kinematics(const ManipulatorModel& model, const Vector& pose,
                          double elbow_sign) {
  const int n = model.dof();
  check_size(pose, model.task_dim(), "pose");
  double wx = pose[0];
  double wy = pose[1];
  if (n == 3) {
    wx -= model.link_lengths[2] * std::cos(pose[2]);
    wy -= model.link_lengths[2] * std::sin(pose[2]);
  }
  const double l1 = model.link_lengths[0];
  const double l2 = model.link_lengths[1];
  const double c2 = (wx * wx + wy * wy - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (c2 < -1.0 || c2 > 1.0) throw Error("pose out of reach");
  const double q2 = (elbow_sign >= 0.0 ? 1.0 : -1.0) * std::acos(c2);
  const double q1 =
      std::atan2(wy, wx) - std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2));
  Vector q(n);
  q[0] = q1;
  q[1] = q2;
  if (n == 3) q[2] = pose[2] - q1 - q2;
  return q;
}

Vector jacobian_dot_qdot(const ManipulatorModel& model, const Vector& q,
                         const Vector& qdot) {
  const int n = model.dof();
  check_size(q, n, "q");
  check_size(qdot, n, "qdot");
  const Vector phi = absolute_angles(q);
  const Vector phidot = absolute_angles(qdot);
  Vector out = Vector::Zero(model.task_dim());
  out.head<2>() = point_jdot_qdot(model, phi, phidot, n - 1);
  return out;
}

Matrix mass_matrix(const ManipulatorModel& model, const Vector& q) {
  const int n = model.dof();
  check_size(q, n, "q");
  const Vector phi = absolute_angles(q);
  Matrix mass = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const Matrix ji = point_jacobian(model, phi, i);
    mass.noalias() += model.link_masses[i] * ji.transpose() * ji;
  }
  // Exact symmetry; the sum above is symmetric up to roundoff.
  return 0.5 * (mass + mass.transpose());
}

Vector coriolis_torque(const ManipulatorModel& model, const Vector& q,
                       const Vector& qdot) {
  const int n = model.dof();
  check_size(q, n, "q");
  check_size(qdot, n, "qdot");
  const Vector phi = absolute_angles(q);
  const Vector phidot = absolute_angles(qdot);
  Vector tau = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    const Matrix ji = point_jacobian(model, phi, i);
    tau.noalias() += model.link_masses[i] * ji.transpose() *
                     point_jdot_qdot(model, phi, phidot, i);
  }
  return tau;
}

Vector gravity_torque(const ManipulatorModel& model, const Vector& q) {
  const int n = model.dof();
  check_size(q, n, "q");
  Vector tau = Vector::Zero(n);
  if (model.gravity == 0.0) return tau;
  const Vector phi = absolute_angles(q);
  for (int i = 0; i < n; ++i) {
    const Matrix ji = point_jacobian(model, phi, i);
    tau += model.link_masses[i] * model.gravity * ji.row(1).transpose();
  }
  return tau;
}

Vector friction_torque(const ManipulatorModel& model, const Vector& qdot) {
  const int n = model.dof();
  Vector tau = Vector::Zero(n);
  if (model.joint_friction.empty()) return tau;
  for (int i = 0; i < n; ++i) {
    tau[i] = model.joint_friction[i] *
             std::tanh(qdot[i] / model.friction_velocity);
  }
  return tau;
}

Matrix task_inertia(const Matrix& jac, const Matrix& mass, double damping) {
  if (jac.cols() != mass.rows() || mass.rows() != mass.cols()) {
    throw DimensionMismatch("jacobian and mass matrix sizes disagree");
  }
  const Matrix minv_jt = mass.ldlt().solve(jac.transpose());
  Matrix inv_lambda = jac * minv_jt;
  inv_lambda = 0.5 * (inv_lambda + inv_lambda.transpose());
  const auto m = inv_lambda.rows();

  if (damping == 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(inv_lambda,
                                              Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
      throw SingularTaskInertia(
          "J M^-1 J^T is singular; use a damped task inertia");
    }
  } else {
    inv_lambda += damping * damping * Matrix::Identity(m, m);
  }
  Matrix lambda = inv_lambda.llt().solve(Matrix::Identity(m, m));
  return 0.5 * (lambda + lambda.transpose());
}

Matrix task_inertia(const ManipulatorModel& model, const Vector& q,
                    double damping) {
  return task_inertia(jacobian(model, q), mass_matrix(model, q), damping);
}

Wrench bias_wrench(const ManipulatorModel& model, const Vector& q,
                   const Vector& qdot, double damping) {
  const Matrix jac = jacobian(model, q);
  const Matrix mass = mass_matrix(model, q);
  const Matrix lambda = task_inertia(jac, mass, damping);
  const Vector joint_bias =
      coriolis_torque(model, q, qdot) + gravity_torque(model, q);
  const Vector accel_bias = jac * mass.ldlt().solve(joint_bias) -
                            jacobian_dot_qdot(model, q, qdot);
  return lambda * accel_bias;
}

Vector forward_dynamics(const ManipulatorModel& model, const JointState& state,
                        const Wrench& tau_task, const Wrench& f_ext) {
  const int n = model.dof();
  check_size(state.q, n, "q");
  check_size(state.qdot, n, "qdot");
  check_size(tau_task, model.task_dim(), "tau_task");
  check_size(f_ext, model.task_dim(), "f_ext");

  const Matrix jac = jacobian(model, state.q);
  Vector tau = jac.transpose() * (tau_task + f_ext);
  tau -= coriolis_torque(model, state.q, state.qdot);
  tau -= gravity_torque(model, state.q);
  for (int i = 0; i < n; ++i) tau[i] -= model.joint_damping[i] * state.qdot[i];
  tau -= friction_torque(model, state.qdot);
  return mass_matrix(model, state.q).ldlt().solve(tau);
}

double kinetic_energy(const ManipulatorModel& model, const JointState& state) {
  return 0.5 * state.qdot.dot(mass_matrix(model, state.q) * state.qdot);
}

double potential_energy(const ManipulatorModel& model, const Vector& q) {
  const Vector phi = absolute_angles(q);
  double v = 0.0;
  double y = 0.0;
  for (int i = 0; i < model.dof(); ++i) {
    y += model.link_lengths[i] * std::sin(phi[i]);
    v += model.link_masses[i] * model.gravity * y;
  }
  return v;
}

JointState rk4_step(const ManipulatorModel& model, const JointState& s,
                    const Wrench& tau_task, const Wrench& f_ext, double dt) {
  auto deriv = [&](const Vector& q, const Vector& qd) {
    return forward_dynamics(model, JointState{q, qd}, tau_task, f_ext);
  };
  const Vector k1v = deriv(s.q, s.qdot);
  const Vector k1x = s.qdot;
  const Vector k2v = deriv(s.q + 0.5 * dt * k1x, s.qdot + 0.5 * dt * k1v);
  const Vector k2x = s.qdot + 0.5 * dt * k1v;
  const Vector k3v = deriv(s.q + 0.5 * dt * k2x, s.qdot + 0.5 * dt * k2v);
  const Vector k3x = s.qdot + 0.5 * dt * k2v;
  const Vector k4v = deriv(s.q + dt * k3x, s.qdot + dt * k3v);
  const Vector k4x = s.qdot + dt * k3v;
  JointState out;
  out.q = s.q + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  out.qdot = s.qdot + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  return out;
}

JointState semi_implicit_euler_step(const ManipulatorModel& model,
                                    const JointState& s,
                                    const Wrench& tau_task, const Wrench& f_ext,
                                    double dt) {
  JointState out;
  out.qdot = s.qdot + dt * forward_dynamics(model, s, tau_task, f_ext);
  out.q = s.q + dt * out.qdot;
  return out;
}

}  // namespace dwdob
