#include "dwdob/contact_env.hpp"

#include <cmath>
#include <limits>

namespace dwdob {

namespace {

constexpr double kHalfPi = 1.5707963267948966;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

struct Face {
  Eigen::Vector2d normal;  // outward from the solid
  double depth;            // distance of the point inside, >= 0 when inside
};

// Solid blocks of the hole in the hole frame. Each is the intersection of
// half-planes; a point is inside when every depth is non-negative and the
// active face is the shallowest one.
std::vector<Face> right_wall_faces(const Eigen::Vector2d& p, double half_w,
                                   double chamfer) {
  std::vector<Face> f{{{-1.0, 0.0}, p.x() - half_w}, {{0.0, 1.0}, -p.y()}};
  if (chamfer > 0.0) {
    f.push_back({{-kInvSqrt2, kInvSqrt2},
                 ((p.x() - half_w) - p.y() - chamfer) * kInvSqrt2});
  }
  return f;
}

std::vector<Face> left_wall_faces(const Eigen::Vector2d& p, double half_w,
                                  double chamfer) {
  std::vector<Face> f{{{1.0, 0.0}, -half_w - p.x()}, {{0.0, 1.0}, -p.y()}};
  if (chamfer > 0.0) {
    f.push_back({{kInvSqrt2, kInvSqrt2},
                 ((-half_w - p.x()) - p.y() - chamfer) * kInvSqrt2});
  }
  return f;
}

bool shallowest(const std::vector<Face>& faces, Face& out) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : faces) {
    if (f.depth < 0.0) return false;
    if (f.depth < best) {
      best = f.depth;
      out = f;
    }
  }
  return true;
}

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

struct PegFrame {
  Eigen::Vector2d tip;     // hole frame
  Eigen::Vector2d tipvel;
  Eigen::Vector2d lateral; // n
  Eigen::Vector2d axis;    // u, from tip toward the peg body
  double omega = 0.0;

  Eigen::Vector2d velocity_at(const Eigen::Vector2d& p) const {
    const Eigen::Vector2d r = p - tip;
    return tipvel + omega * Eigen::Vector2d(-r.y(), r.x());
  }
};

PegFrame peg_frame(const Vector& pose, const Vector& vel,
                   const HoleGeometry& geom) {
  PegFrame f;
  f.tip = Eigen::Vector2d(pose[0], pose[1]) - geom.center;
  f.tipvel = Eigen::Vector2d(vel[0], vel[1]);
  const double tilt = pose.size() == 3 ? pose[2] + kHalfPi : 0.0;
  f.omega = pose.size() == 3 ? vel[2] : 0.0;
  f.lateral = {std::cos(tilt), std::sin(tilt)};
  f.axis = {-std::sin(tilt), std::cos(tilt)};
  return f;
}

// Penalty force for penetration `depth` with normal `normal` (direction of
// the force on the peg) and penetration rate `rate`, plus regularized
// Coulomb friction against the sliding velocity `slip` of the peg.
ContactPoint penalty(const HoleGeometry& g, const Eigen::Vector2d& point,
                     const Eigen::Vector2d& normal, double depth, double rate,
                     const Eigen::Vector2d& peg_velocity) {
  ContactPoint c;
  c.point = point;
  c.normal = normal;
  c.penetration = depth;
  c.normal_force = std::max(0.0, g.wall_stiffness * depth + g.wall_damping * rate);
  const Eigen::Vector2d tangent(-normal.y(), normal.x());
  const double slip = peg_velocity.dot(tangent);
  c.force = c.normal_force * normal -
            g.friction_coeff * c.normal_force *
                std::tanh(slip / g.friction_velocity) * tangent;
  return c;
}

}  // namespace

void HoleGeometry::validate() const {
  if (!(peg_width > 0.0)) throw ConfigInvalid("geom.peg_width", "must be > 0");
  if (!(clearance() > 0.0)) {
    throw ConfigInvalid("geom.width", "hole must be wider than the peg");
  }
  if (!(depth > 0.0)) throw ConfigInvalid("geom.depth", "must be > 0");
  if (!(peg_length > 0.0)) throw ConfigInvalid("geom.peg_length", "must be > 0");
  if (!(chamfer >= 0.0)) throw ConfigInvalid("geom.chamfer", "must be >= 0");
  if (!(wall_stiffness > 0.0)) {
    throw ConfigInvalid("geom.wall_stiffness", "must be > 0");
  }
  if (!(wall_damping >= 0.0)) {
    throw ConfigInvalid("geom.wall_damping", "must be >= 0");
  }
  if (!(friction_coeff >= 0.0 && friction_coeff < 2.0)) {
    throw ConfigInvalid("geom.friction_coeff", "must lie in [0, 2)");
  }
  if (!(friction_velocity > 0.0)) {
    throw ConfigInvalid("geom.friction_velocity", "must be > 0");
  }
}

HoleGeometry nominal_hole() { return HoleGeometry{}; }

HoleGeometry tight_hole() {
  HoleGeometry g;
  g.width = 0.020034;
  g.wall_stiffness = 1e6;
  return g;
}

ContactResult evaluate_contacts(const Vector& peg_pose, const Vector& peg_vel,
                                const HoleGeometry& geom) {
  const PegFrame peg = peg_frame(peg_pose, peg_vel, geom);
  const double half_w = 0.5 * geom.width;
  const double half_peg = 0.5 * geom.peg_width;
  const double c = geom.chamfer;

  ContactResult out;

  // Peg tip corners against the wall blocks and the hole bottom.
  for (double side : {-1.0, 1.0}) {
    const Eigen::Vector2d corner = peg.tip + side * half_peg * peg.lateral;
    const Eigen::Vector2d v = peg.velocity_at(corner);
    Face face{{0.0, 0.0}, 0.0};
    bool hit = false;
    if (corner.x() >= half_w) {
      hit = shallowest(right_wall_faces(corner, half_w, c), face);
    } else if (corner.x() <= -half_w) {
      hit = shallowest(left_wall_faces(corner, half_w, c), face);
    } else if (corner.y() <= -geom.depth) {
      face = {{0.0, 1.0}, -geom.depth - corner.y()};
      hit = true;
    }
    if (hit) {
      out.points.push_back(
          penalty(geom, corner, face.normal, face.depth, -v.dot(face.normal), v));
    }
  }

  // Wall edges pressing into the peg flanks.
  std::vector<Eigen::Vector2d> edges{{half_w, -c}, {-half_w, -c}};
  if (c > 0.0) {
    edges.emplace_back(half_w + c, 0.0);
    edges.emplace_back(-half_w - c, 0.0);
  }
  for (const auto& e : edges) {
    const Eigen::Vector2d r = e - peg.tip;
    const double s = r.dot(peg.lateral);
    const double h = r.dot(peg.axis);
    if (std::abs(s) >= half_peg || h <= 0.0 || h >= geom.peg_length) continue;
    // Peg faces: +lateral, -lateral, tip (-axis), top (+axis).
    const Face faces[] = {{peg.lateral, half_peg - s},
                          {-peg.lateral, half_peg + s},
                          {-peg.axis, h},
                          {peg.axis, geom.peg_length - h}};
    Face face = faces[0];
    for (const auto& f : faces) {
      if (f.depth < face.depth) face = f;
    }
    const Eigen::Vector2d v = peg.velocity_at(e);
    out.points.push_back(
        penalty(geom, e, -face.normal, face.depth, v.dot(face.normal), v));
  }

  Eigen::Vector2d force = Eigen::Vector2d::Zero();
  double moment = 0.0;
  for (const auto& p : out.points) {
    force += p.force;
    moment += cross2(p.point - peg.tip, p.force);
    out.spring_energy += 0.5 * geom.wall_stiffness * p.penetration * p.penetration;
  }
  out.wrench = Wrench::Zero(peg_pose.size());
  out.wrench[0] = force.x();
  out.wrench[1] = force.y();
  if (peg_pose.size() == 3) out.wrench[2] = moment;
  return out;
}

Wrench contact_wrench(const Vector& peg_pose, const Vector& peg_vel,
                      const HoleGeometry& geom) {
  return evaluate_contacts(peg_pose, peg_vel, geom).wrench;
}

double insertion_depth(const Vector& peg_pose, const HoleGeometry& geom) {
  return geom.center.y() - peg_pose[1];
}

Wrench Excitation::at(double t, int task_dim) const {
  Wrench w = Wrench::Zero(task_dim);
  if (!active()) return w;
  const double tau = t - start;
  if (tau < 0.0 || tau >= period * cycles) return w;
  w[axis] = amplitude * std::sin(kTwoPi * tau / period);
  return w;
}

void SimConfig::validate(int task_dim) const {
  if (!(control_dt > 0.0)) throw ConfigInvalid("sim.control_dt", "must be > 0");
  if (physics_substeps < 1) {
    throw ConfigInvalid("sim.physics_substeps", "must be >= 1");
  }
  if (!(duration > 0.0)) throw ConfigInvalid("sim.duration", "must be > 0");
  if (feedforward.size() != task_dim) {
    throw ConfigInvalid("sim.feedforward", "must match the task dimension");
  }
  if (initial_pose.size() != task_dim) {
    throw ConfigInvalid("sim.initial_pose", "must match the task dimension");
  }
  if (!(sensor_noise_std >= 0.0)) {
    throw ConfigInvalid("sim.sensor_noise_std", "must be >= 0");
  }
  if (!(sensor_moment_noise_std >= 0.0)) {
    throw ConfigInvalid("sim.sensor_moment_noise_std", "must be >= 0");
  }
  if (excitation.axis < 0 || excitation.axis >= task_dim) {
    throw ConfigInvalid("sim.excitation.axis", "outside the task dimension");
  }
  if (excitation.cycles < 0 || !(excitation.period > 0.0)) {
    throw ConfigInvalid("sim.excitation", "period must be > 0, cycles >= 0");
  }
  if (!(observer_storage_weight >= 0.0)) {
    throw ConfigInvalid("sim.observer_storage_weight", "must be >= 0");
  }
}

ClosedLoopSim::ClosedLoopSim(ManipulatorModel plant, HoleGeometry geom,
                             SimConfig config, WrenchController controller,
                             SafetyLimits limits, std::uint64_t seed)
    : plant_(std::move(plant)),
      geom_(std::move(geom)),
      config_(std::move(config)),
      controller_(std::move(controller)),
      limits_(limits),
      rng_(seed) {
  plant_.validate();
  geom_.validate();
  limits_.validate();
  config_.validate(plant_.task_dim());
  state_.q = inverse_kinematics(plant_, config_.initial_pose, config_.elbow_sign);
  state_.qdot = Vector::Zero(plant_.dof());
  push_ = Wrench::Zero(plant_.task_dim());
  const auto m = plant_.task_dim();
  last_output_ = {Wrench::Zero(m), Wrench::Zero(m), Wrench::Zero(m),
                  Wrench::Zero(m)};
}

Wrench ClosedLoopSim::environment_wrench(const JointState& s) const {
  Wrench w = push_;
  if (config_.with_contact) {
    const Vector pose = forward_kinematics(plant_, s.q);
    const Vector xdot = jacobian(plant_, s.q) * s.qdot;
    w += contact_wrench(pose, xdot, geom_);
  }
  return w;
}

TickRecord ClosedLoopSim::step() {
  const auto m = plant_.task_dim();
  TickRecord rec;
  rec.t = time();
  rec.q = state_.q;
  rec.qdot = state_.qdot;
  rec.pose = forward_kinematics(plant_, state_.q);
  rec.xdot = jacobian(plant_, state_.q) * state_.qdot;
  rec.depth = insertion_depth(rec.pose, geom_);

  Wrench measured = environment_wrench(state_);
  if (config_.sensor_noise_std > 0.0 || config_.sensor_moment_noise_std > 0.0) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double std = (m == 3 && i == 2) ? config_.sensor_moment_noise_std
                                            : config_.sensor_noise_std;
      measured[i] += std * noise_(rng_);
    }
  }
  rec.f_ext = measured;

  const bool was_stopped = ledger_.stopped;
  if (!latch_safety(ledger_, limits_, measured)) {
    ControlInput in;
    in.q = state_.q;
    in.pose = rec.pose;
    in.f_ext = measured;
    in.feedforward = config_.feedforward;
    in.excitation = config_.excitation.at(rec.t, m);
    last_output_ = controller_.update(in);
  }
  rec.f_c = last_output_.f_c;
  rec.f_c_prime = last_output_.f_c_prime;
  rec.applied = last_output_.applied;
  rec.d_hat = last_output_.d_hat;

  if (!was_stopped) {
    port_energy_step(ledger_, measured, rec.xdot, config_.control_dt);
    double s = storage(controller_.lambda_hat(state_.q), rec.xdot);
    if (config_.observer_storage_weight > 0.0) {
      s += 0.5 * config_.observer_storage_weight * rec.d_hat.squaredNorm();
    }
    update_storage(ledger_, s);
  }
  rec.e_port = ledger_.e_port;
  rec.storage = ledger_.s_now;
  rec.rho = ledger_.rho;
  rec.stopped = ledger_.stopped;

  if (!ledger_.stopped) {
    const double h = config_.control_dt / config_.physics_substeps;
    for (int k = 0; k < config_.physics_substeps; ++k) {
      state_ = semi_implicit_euler_step(plant_, state_, rec.applied,
                                        environment_wrench(state_), h);
    }
  }
  ++tick_;
  return rec;
}

Trace ClosedLoopSim::run() {
  Trace trace;
  trace.dof = plant_.dof();
  trace.task_dim = plant_.task_dim();
  trace.dt = config_.control_dt;
  const auto n_ticks =
      static_cast<std::int64_t>(std::llround(config_.duration / config_.control_dt));
  trace.ticks.reserve(static_cast<std::size_t>(n_ticks));
  while (tick_ < n_ticks) {
    trace.ticks.push_back(step());
    if (ledger_.stopped) break;
  }
  trace.stopped = ledger_.stopped;
  trace.stop_reason = ledger_.stop_reason;
  return trace;
}

}  // namespace dwdob
