#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dwdob/filters.hpp"
#include "dwdob/rigid_body.hpp"

using namespace dwdob;

namespace {

// Independent planar-chain kinematics used as the oracle below.
struct Chain {
  std::vector<double> l, m;
  double g = 0.0;

  std::vector<Eigen::Vector2d> tips(const Vector& q) const {
    std::vector<Eigen::Vector2d> p;
    double phi = 0.0;
    Eigen::Vector2d acc(0.0, 0.0);
    for (std::size_t k = 0; k < l.size(); ++k) {
      phi += q[static_cast<Eigen::Index>(k)];
      acc += l[k] * Eigen::Vector2d(std::cos(phi), std::sin(phi));
      p.push_back(acc);
    }
    return p;
  }

  double kinetic(const Vector& q, const Vector& qd) const {
    double t = 0.0;
    double phi = 0.0, phid = 0.0;
    Eigen::Vector2d v(0.0, 0.0);
    for (std::size_t k = 0; k < l.size(); ++k) {
      phi += q[static_cast<Eigen::Index>(k)];
      phid += qd[static_cast<Eigen::Index>(k)];
      v += l[k] * phid * Eigen::Vector2d(-std::sin(phi), std::cos(phi));
      t += 0.5 * m[k] * v.squaredNorm();
    }
    return t;
  }

  double potential(const Vector& q) const {
    double v = 0.0;
    const auto p = tips(q);
    for (std::size_t k = 0; k < l.size(); ++k) v += m[k] * g * p[k].y();
    return v;
  }

  // Quadratic form polarization: M_ij from kinetic energies.
  Matrix mass(const Vector& q) const {
    const auto n = q.size();
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        Vector ei = Vector::Unit(n, i), ej = Vector::Unit(n, j);
        out(i, j) = kinetic(q, ei + ej) - kinetic(q, ei) - kinetic(q, ej);
      }
    }
    return out;
  }

  // Euler-Lagrange: C qdot = Mdot qdot - 1/2 d/dq (qdot^T M qdot).
  Vector coriolis(const Vector& q, const Vector& qd) const {
    const double h = 1e-6;
    const auto n = q.size();
    const Matrix mdot = (mass(q + h * qd) - mass(q - h * qd)) / (2.0 * h);
    Vector grad(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      Vector e = Vector::Unit(n, k) * h;
      grad[k] = (kinetic(q + e, qd) - kinetic(q - e, qd)) / (2.0 * h);
    }
    return mdot * qd - grad;
  }

  Vector gravity(const Vector& q) const {
    const double h = 1e-6;
    Vector out(q.size());
    for (Eigen::Index k = 0; k < q.size(); ++k) {
      Vector e = Vector::Unit(q.size(), k) * h;
      out[k] = (potential(q + e) - potential(q - e)) / (2.0 * h);
    }
    return out;
  }
};

Chain chain_of(const ManipulatorModel& m) {
  return Chain{m.link_lengths, m.link_masses, m.gravity};
}

ManipulatorModel three_link() {
  ManipulatorModel m;
  m.link_lengths = {0.4, 0.3, 0.15};
  m.link_masses = {1.7, 1.1, 0.6};
  m.joint_damping = {0.0, 0.0, 0.0};
  m.gravity = 9.81;
  return m;
}

Vector random_q(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  Vector q(n);
  for (int i = 0; i < n; ++i) q[i] = u(rng);
  return q;
}

// Keeps the elbow away from the straight-arm singularity.
Vector random_nonsingular_q(std::mt19937_64& rng, int n) {
  Vector q = random_q(rng, n);
  while (std::abs(std::sin(q[1])) < 0.1) q = random_q(rng, n);
  return q;
}

}  // namespace

TEST(RigidBody, MassMatrixMatchesKineticEnergyHessian) {
  std::mt19937_64 rng(7);
  for (const auto& model : {unit_two_link(), three_link()}) {
    const Chain c = chain_of(model);
    for (int trial = 0; trial < 50; ++trial) {
      const Vector q = random_q(rng, model.dof());
      const Matrix m = mass_matrix(model, q);
      EXPECT_LT((m - c.mass(q)).norm(), 1e-12 * (1.0 + m.norm()));
      EXPECT_EQ(m, m.transpose());
    }
  }
}

TEST(RigidBody, TwoLinkMassMatrixClosedForm) {
  const auto model = unit_two_link();
  Vector q(2);
  q << 0.3, 1.1;
  // Point masses at the tips: M11 = m1 l1^2 + m2 (l1^2 + l2^2 + 2 l1 l2 c2).
  const double c2 = std::cos(1.1);
  Matrix expected(2, 2);
  expected << 1.0 + 2.0 + 2.0 * c2, 1.0 + c2, 1.0 + c2, 1.0;
  EXPECT_LT((mass_matrix(model, q) - expected).norm(), 1e-14);
}

TEST(RigidBody, CoriolisMatchesEulerLagrange) {
  std::mt19937_64 rng(11);
  for (const auto& model : {unit_two_link(), three_link()}) {
    const Chain c = chain_of(model);
    for (int trial = 0; trial < 30; ++trial) {
      const Vector q = random_q(rng, model.dof());
      const Vector qd = random_q(rng, model.dof());
      const Vector ours = coriolis_torque(model, q, qd);
      EXPECT_LT((ours - c.coriolis(q, qd)).norm(), 1e-6 * (1.0 + ours.norm()));
    }
  }
}

TEST(RigidBody, CoriolisSkewSymmetryPowerIdentity) {
  // qdot^T C qdot = 1/2 qdot^T Mdot qdot.
  std::mt19937_64 rng(5);
  const auto model = three_link();
  for (int trial = 0; trial < 30; ++trial) {
    const Vector q = random_q(rng, 3);
    const Vector qd = random_q(rng, 3);
    const double h = 1e-6;
    const Matrix mdot =
        (mass_matrix(model, q + h * qd) - mass_matrix(model, q - h * qd)) / (2 * h);
    EXPECT_NEAR(qd.dot(coriolis_torque(model, q, qd)), 0.5 * qd.dot(mdot * qd),
                1e-6);
  }
}

TEST(RigidBody, GravityIsPotentialGradient) {
  std::mt19937_64 rng(3);
  auto model = three_link();
  const Chain c = chain_of(model);
  for (int trial = 0; trial < 30; ++trial) {
    const Vector q = random_q(rng, 3);
    EXPECT_LT((gravity_torque(model, q) - c.gravity(q)).norm(), 1e-6);
    EXPECT_NEAR(potential_energy(model, q), c.potential(q), 1e-12);
  }
  model.gravity = 0.0;
  EXPECT_EQ(gravity_torque(model, random_q(rng, 3)), Vector::Zero(3));
}

TEST(RigidBody, JacobianMatchesFiniteDifference) {
  std::mt19937_64 rng(13);
  for (const auto& model : {unit_two_link(), three_link()}) {
    for (int trial = 0; trial < 30; ++trial) {
      const Vector q = random_q(rng, model.dof());
      const Matrix jac = jacobian(model, q);
      const double h = 1e-6;
      for (int k = 0; k < model.dof(); ++k) {
        const Vector e = Vector::Unit(model.dof(), k) * h;
        const Vector col = (forward_kinematics(model, q + e) -
                            forward_kinematics(model, q - e)) /
                           (2.0 * h);
        EXPECT_LT((jac.col(k) - col).norm(), 1e-8);
      }
    }
  }
}

TEST(RigidBody, JacobianDotMatchesFiniteDifference) {
  std::mt19937_64 rng(17);
  for (const auto& model : {unit_two_link(), three_link()}) {
    for (int trial = 0; trial < 30; ++trial) {
      const Vector q = random_q(rng, model.dof());
      const Vector qd = random_q(rng, model.dof());
      const double h = 1e-6;
      const Vector fd =
          (jacobian(model, q + h * qd) - jacobian(model, q - h * qd)) / (2 * h) * qd;
      EXPECT_LT((jacobian_dot_qdot(model, q, qd) - fd).norm(), 1e-6);
    }
  }
}

TEST(RigidBody, InverseKinematicsRoundTrip) {
  std::mt19937_64 rng(19);
  for (const auto& model : {unit_two_link(), three_link()}) {
    for (int trial = 0; trial < 30; ++trial) {
      const Vector q = random_nonsingular_q(rng, model.dof());
      const Vector pose = forward_kinematics(model, q);
      for (double sign : {1.0, -1.0}) {
        const Vector back = inverse_kinematics(model, pose, sign);
        const Vector pose2 = forward_kinematics(model, back);
        EXPECT_LT((pose2.head<2>() - pose.head<2>()).norm(), 1e-10);
        if (model.dof() == 3) {
          EXPECT_NEAR(std::remainder(pose2[2] - pose[2], kTwoPi), 0.0,
                      1e-10);
        }
      }
    }
  }
  Vector far(2);
  far << 3.0, 0.0;
  EXPECT_THROW(inverse_kinematics(unit_two_link(), far), Error);
}

TEST(RigidBody, KineticEnergyEquivalenceInTaskSpace) {
  std::mt19937_64 rng(23);
  for (const auto& model : {unit_two_link(), three_link()}) {
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector q = random_nonsingular_q(rng, model.dof());
      const Vector qd = random_q(rng, model.dof());
      const Vector xd = jacobian(model, q) * qd;
      const double tq = 0.5 * qd.dot(mass_matrix(model, q) * qd);
      const double tx = 0.5 * xd.dot(task_inertia(model, q) * xd);
      worst = std::max(worst, std::abs(tq - tx) / std::max(tq, 1e-300));
    }
    EXPECT_LE(worst, 1e-10);
  }
}

TEST(RigidBody, TaskInertiaIsSymmetricPositiveDefinite) {
  std::mt19937_64 rng(29);
  const auto model = three_link();
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector q = random_nonsingular_q(rng, 3);
    const Matrix lambda = task_inertia(model, q);
    EXPECT_EQ(lambda, lambda.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(lambda);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(RigidBody, StraightArmIsSingularUnlessDamped) {
  const auto model = unit_two_link();
  Vector q(2);
  q << 0.4, 0.0;
  EXPECT_THROW(task_inertia(model, q), SingularTaskInertia);
  const Matrix damped = task_inertia(model, q, kDefaultTaskDamping);
  EXPECT_TRUE(damped.allFinite());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(damped);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(RigidBody, TaskInertiaReducesToMassForDirectDrive) {
  // With J = I the task inertia is the joint mass matrix itself.
  Matrix mass(2, 2);
  mass << 2.0, 0.3, 0.3, 1.0;
  EXPECT_LT((task_inertia(Matrix::Identity(2, 2), mass) - mass).norm(), 1e-13);
}

TEST(RigidBody, BiasWrenchClosesTaskSpaceDynamics) {
  // Lambda xddot + mu = F for a free arm driven by a task wrench F.
  std::mt19937_64 rng(31);
  for (const auto& model : {unit_two_link(), three_link()}) {
    for (int trial = 0; trial < 30; ++trial) {
      const Vector q = random_nonsingular_q(rng, model.dof());
      const Vector qd = random_q(rng, model.dof());
      const Wrench f = random_q(rng, model.task_dim());
      const Vector qdd = forward_dynamics(model, {q, qd}, f,
                                          Wrench::Zero(model.task_dim()));
      const Vector xdd =
          jacobian(model, q) * qdd + jacobian_dot_qdot(model, q, qd);
      const Vector lhs =
          task_inertia(model, q) * xdd + bias_wrench(model, q, qd);
      EXPECT_LT((lhs - f).norm(), 1e-8 * (1.0 + f.norm()));
    }
  }
}

TEST(RigidBody, ForwardDynamicsAtRestWithoutGravityIsStatic) {
  auto model = three_link();
  model.gravity = 0.0;
  const Vector q = Vector::Constant(3, 0.5);
  const Vector qdd = forward_dynamics(model, {q, Vector::Zero(3)}, Wrench::Zero(3),
                                      Wrench::Zero(3));
  EXPECT_EQ(qdd, Vector::Zero(3));
}

TEST(RigidBody, Rk4ConservesEnergyOfFreeSwing) {
  auto model = unit_two_link();
  model.gravity = 9.81;
  JointState s{Vector::Zero(2), Vector::Zero(2)};
  s.q << 0.3, 0.8;
  s.qdot << 0.5, -0.2;
  auto energy = [&](const JointState& st) {
    return kinetic_energy(model, st) + potential_energy(model, st.q);
  };
  const double e0 = energy(s);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    s = rk4_step(model, s, Wrench::Zero(2), Wrench::Zero(2), 1e-4);
    worst = std::max(worst, std::abs(energy(s) - e0));
  }
  EXPECT_LE(worst / std::abs(e0), 1e-6);
}

TEST(RigidBody, DampedPlantOnlyDissipates) {
  auto model = unit_two_link();
  model.joint_damping = {0.4, 0.2};
  JointState s{Vector::Zero(2), Vector::Zero(2)};
  s.q << 0.2, 1.0;
  s.qdot << 1.0, -1.5;
  double prev = kinetic_energy(model, s);
  for (int k = 0; k < 5000; ++k) {
    s = rk4_step(model, s, Wrench::Zero(2), Wrench::Zero(2), 1e-4);
    const double e = kinetic_energy(model, s);
    EXPECT_LE(e, prev + 1e-12);
    prev = e;
  }
}

TEST(RigidBody, FrictionOpposesMotion) {
  auto model = three_link();
  model.joint_friction = {1.0, 0.5, 0.2};
  Vector qd(3);
  qd << 0.5, -0.01, 0.0;
  const Vector tau = friction_torque(model, qd);
  EXPECT_GT(tau[0], 0.99);
  EXPECT_LT(tau[1], 0.0);
  EXPECT_EQ(tau[2], 0.0);
}

TEST(RigidBody, ValidationNamesTheField) {
  auto model = unit_two_link();
  model.link_masses = {1.0, -1.0};
  try {
    model.validate();
    FAIL();
  } catch (const ConfigInvalid& e) {
    EXPECT_EQ(e.field(), "model.link_masses");
  }
  model = unit_two_link();
  model.joint_damping = {0.1};
  EXPECT_THROW(model.validate(), ConfigInvalid);
  EXPECT_THROW(mass_matrix(unit_two_link(), Vector::Zero(3)), DimensionMismatch);
}
