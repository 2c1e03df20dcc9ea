#include "dwdob/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace dwdob {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kHalfPi = 1.5707963267948966;

// ---------------------------------------------------------------- enums ----

struct ControllerName {
  ControllerChoice value;
  std::string_view name;
};

constexpr ControllerName kControllerNames[] = {
    {ControllerChoice::kPdLow, "PD_l"},
    {ControllerChoice::kPdHigh, "PD_h"},
    {ControllerChoice::kCwdob, "CWDOB"},
    {ControllerChoice::kDwdob, "DWDOB"},
};

struct PresetName {
  Preset value;
  std::string_view name;
};

constexpr PresetName kPresetNames[] = {
    {Preset::kNominal, "nominal"},
    {Preset::kTight, "tight"},
    {Preset::kNoisy, "noisy"},
    {Preset::kAggressive, "aggressive"},
};

// ------------------------------------------------------------ json utils ----

Json to_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const Matrix& m) {
  if (m.size() == 0) return Json();
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

// Reads an object field by field; unknown keys are errors.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigInvalid(path_, "expected an object");
    for (const auto& item : j_.items()) {
      unused_.push_back(item.key());
    }
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const Json* get(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    unused_.erase(std::remove(unused_.begin(), unused_.end(), key),
                  unused_.end());
    return &*it;
  }

  void number(const std::string& key, double& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number()) throw ConfigInvalid(field(key), "expected a number");
      out = v->get<double>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number_integer()) {
        throw ConfigInvalid(field(key), "expected an integer");
      }
      out = v->get<int>();
    }
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number_unsigned()) {
        throw ConfigInvalid(field(key), "expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const Json* v = get(key)) {
      if (!v->is_boolean()) throw ConfigInvalid(field(key), "expected a boolean");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const Json* v = get(key)) {
      if (!v->is_string()) throw ConfigInvalid(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const Json* v = get(key)) {
      if (!v->is_array()) throw ConfigInvalid(field(key), "expected an array");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) {
          throw ConfigInvalid(field(key), "expected an array of numbers");
        }
        out.push_back(x.get<double>());
      }
    }
  }

  void vector(const std::string& key, Vector& out) {
    if (get(key) == nullptr) return;
    std::vector<double> v;
    unused_.push_back(key);
    numbers(key, v);
    out = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  void matrix(const std::string& key, Matrix& out) {
    const Json* v = get(key);
    if (v == nullptr) return;
    if (v->is_null()) {
      out.resize(0, 0);
      return;
    }
    if (!v->is_array()) throw ConfigInvalid(field(key), "expected rows or null");
    const auto rows = static_cast<Eigen::Index>(v->size());
    out.resize(rows, rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Json& row = (*v)[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
        throw ConfigInvalid(field(key), "expected a square matrix");
      }
      for (Eigen::Index c = 0; c < rows; ++c) {
        const Json& x = row[static_cast<std::size_t>(c)];
        if (!x.is_number()) throw ConfigInvalid(field(key), "expected numbers");
        out(r, c) = x.get<double>();
      }
    }
  }

  template <typename F>
  void object(const std::string& key, F&& parse) {
    if (const Json* v = get(key)) {
      Reader sub(*v, field(key));
      parse(sub);
      sub.finish();
    }
  }

  void finish() const {
    if (!unused_.empty()) throw ConfigInvalid(field(unused_.front()), "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::vector<std::string> unused_;
};

Json scenario_to_json(const Scenario& s) {
  Json j;
  j["name"] = s.name;
  j["controller"] = std::string(to_string(s.controller));
  j["seed"] = s.seed;
  j["gains"] = {{"kp", to_json(s.gains.kp)}, {"kd", to_json(s.gains.kd)}};

  Json model;
  model["link_lengths"] = to_json(s.model.link_lengths);
  model["link_masses"] = to_json(s.model.link_masses);
  model["gravity"] = s.model.gravity;
  model["joint_damping"] = to_json(s.model.joint_damping);
  model["joint_friction"] = to_json(s.model.joint_friction);
  model["friction_velocity"] = s.model.friction_velocity;
  j["model"] = model;

  Json geom;
  geom["width"] = s.geom.width;
  geom["depth"] = s.geom.depth;
  geom["peg_width"] = s.geom.peg_width;
  geom["peg_length"] = s.geom.peg_length;
  geom["chamfer"] = s.geom.chamfer;
  geom["wall_stiffness"] = s.geom.wall_stiffness;
  geom["wall_damping"] = s.geom.wall_damping;
  geom["friction_coeff"] = s.geom.friction_coeff;
  geom["friction_velocity"] = s.geom.friction_velocity;
  geom["center"] = {s.geom.center.x(), s.geom.center.y()};
  j["geometry"] = geom;

  Json sim;
  sim["control_dt"] = s.sim.control_dt;
  sim["physics_substeps"] = s.sim.physics_substeps;
  sim["duration"] = s.sim.duration;
  sim["feedforward"] = to_json(s.sim.feedforward);
  sim["initial_pose"] = to_json(s.sim.initial_pose);
  sim["elbow_sign"] = s.sim.elbow_sign;
  sim["sensor_noise_std"] = s.sim.sensor_noise_std;
  sim["sensor_moment_noise_std"] = s.sim.sensor_moment_noise_std;
  sim["with_contact"] = s.sim.with_contact;
  sim["observer_storage_weight"] = s.sim.observer_storage_weight;
  sim["excitation"] = {{"axis", s.sim.excitation.axis},
                       {"amplitude", s.sim.excitation.amplitude},
                       {"start", s.sim.excitation.start},
                       {"period", s.sim.excitation.period},
                       {"cycles", s.sim.excitation.cycles}};
  j["sim"] = sim;

  Json obs;
  obs["q_cutoff_hz"] = s.observer.q_cutoff_hz;
  obs["composite_hz"] = to_json(s.observer.composite_hz);
  obs["diff_stages"] = s.observer.diff_stages;
  obs["fdot_cutoff_hz"] = s.observer.fdot_cutoff_hz;
  obs["task_damping"] = s.observer.task_damping;
  j["observer"] = obs;

  j["regulated_axes"] = to_json(s.regulated);
  j["mismatch"] = {{"lambda_scale", s.mismatch.lambda_scale},
                   {"lambda_offset", to_json(s.mismatch.lambda_offset)}};
  j["limits"] = {{"force_max", s.limits.force_max},
                 {"moment_max", s.limits.moment_max}};
  return j;
}

std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

bool same_model(const ManipulatorModel& a, const ManipulatorModel& b) {
  return a.link_lengths == b.link_lengths && a.link_masses == b.link_masses &&
         a.gravity == b.gravity && a.joint_damping == b.joint_damping &&
         a.joint_friction == b.joint_friction &&
         a.friction_velocity == b.friction_velocity;
}

bool same_geometry(const HoleGeometry& a, const HoleGeometry& b) {
  return a.width == b.width && a.depth == b.depth &&
         a.peg_width == b.peg_width && a.peg_length == b.peg_length &&
         a.chamfer == b.chamfer && a.wall_stiffness == b.wall_stiffness &&
         a.wall_damping == b.wall_damping &&
         a.friction_coeff == b.friction_coeff &&
         a.friction_velocity == b.friction_velocity && a.center == b.center;
}

}  // namespace

// ------------------------------------------------------------- enums ------

std::string_view to_string(ControllerChoice c) {
  for (const auto& n : kControllerNames) {
    if (n.value == c) return n.name;
  }
  return "?";
}

std::optional<ControllerChoice> parse_controller(std::string_view s) {
  for (const auto& n : kControllerNames) {
    if (n.name == s) return n.value;
  }
  return std::nullopt;
}

std::string_view to_string(Preset p) {
  for (const auto& n : kPresetNames) {
    if (n.value == p) return n.name;
  }
  return "?";
}

std::optional<Preset> parse_preset(std::string_view s) {
  for (const auto& n : kPresetNames) {
    if (n.name == s) return n.value;
  }
  return std::nullopt;
}

// ---------------------------------------------------------- scenarios -----

ObserverConfig ObserverSettings::to_config(double dt) const {
  ObserverConfig c;
  c.q_filter = {hz_to_rad(q_cutoff_hz), dt};
  c.composite.diff_stages = diff_stages;
  for (double hz : composite_hz) c.composite.stages.push_back({hz_to_rad(hz), dt});
  c.fdot_filter = {hz_to_rad(fdot_cutoff_hz), dt};
  c.task_damping = task_damping;
  return c;
}

void Scenario::validate() const {
  if (name.empty()) throw ConfigInvalid("name", "must not be empty");
  model.validate();
  geom.validate();
  limits.validate();
  mismatch.validate();
  gains.validate();
  const int m = model.task_dim();
  if (gains.kp.size() != m) {
    throw ConfigInvalid("gains.kp", "must match the task dimension");
  }
  if (regulated.size() != m) {
    throw ConfigInvalid("regulated_axes", "must match the task dimension");
  }
  for (Eigen::Index i = 0; i < regulated.size(); ++i) {
    if (regulated[i] != 0.0 && regulated[i] != 1.0) {
      throw ConfigInvalid("regulated_axes", "entries must be 0 or 1");
    }
  }
  const PdGains expected = controller == ControllerChoice::kPdHigh
                               ? gain_set_b(m)
                               : gain_set_a(m);
  if (gains.kp != expected.kp || gains.kd != expected.kd) {
    throw ConfigInvalid("gains", controller == ControllerChoice::kPdHigh
                                     ? "PD_h runs with gain set B"
                                     : "this controller runs with gain set A");
  }
  sim.validate(m);
  if (sim.with_contact && m != 3) {
    throw ConfigInvalid("model.link_lengths",
                        "the peg-in-hole world needs the three-link arm");
  }
  try {
    observer.to_config(sim.control_dt).validate();
  } catch (const ConfigInvalid& e) {
    throw ConfigInvalid("observer", e.what());
  } catch (const StreamRateMismatch& e) {
    throw ConfigInvalid("observer", e.what());
  }
  if (!(sim.elbow_sign == 1.0 || sim.elbow_sign == -1.0)) {
    throw ConfigInvalid("sim.elbow_sign", "must be +1 or -1");
  }
  try {
    inverse_kinematics(model, sim.initial_pose, sim.elbow_sign);
  } catch (const Error&) {
    throw ConfigInvalid("sim.initial_pose", "out of reach of the arm");
  }
}

ManipulatorModel peg_arm() {
  ManipulatorModel m;
  m.link_lengths = {0.30, 0.30, 0.10};
  m.link_masses = {2.0, 1.5, 0.5};
  m.gravity = 0.0;
  m.joint_damping = {50.0, 35.0, 1.0};
  m.joint_friction = {1.0, 0.8, 0.3};
  m.friction_velocity = 1e-3;
  return m;
}

Scenario make_scenario(Preset preset, ControllerChoice controller) {
  Scenario s;
  s.controller = controller;
  s.name = std::string(to_string(controller)) + "_" + std::string(to_string(preset));
  s.model = peg_arm();
  const int m = s.model.task_dim();
  s.gains = controller == ControllerChoice::kPdHigh ? gain_set_b(m) : gain_set_a(m);
  s.geom = preset == Preset::kTight ? tight_hole() : nominal_hole();

  s.sim.control_dt = 1e-3;
  s.sim.physics_substeps = 10;
  s.sim.duration = 3.0;
  s.sim.feedforward = Wrench::Zero(m);
  s.sim.feedforward[1] = -20.0;
  // Tip 1 mm above the opening, tilted by 0.02 rad.
  s.sim.initial_pose = Vector(m);
  s.sim.initial_pose << -0.216, -0.340, -kHalfPi + 0.02;
  s.sim.elbow_sign = 1.0;
  if (preset == Preset::kNoisy) {
    s.sim.sensor_noise_std = 0.2;
    s.sim.sensor_moment_noise_std = 0.005;
  }
  if (preset == Preset::kAggressive) {
    // Lateral acceleration pulse once the peg is engaged.
    s.sim.excitation = Excitation{0, 15.0, 0.3, 0.1, 1};
  }

  s.regulated = Vector::Zero(m);
  s.regulated[0] = 1.0;
  s.regulated[2] = 1.0;
  s.limits = SafetyLimits{};
  s.seed = 1;
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  return scenario_to_json(s).dump(2) + "\n";
}

Scenario parse_scenario(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigInvalid("<document>", e.what());
  }
  if (!j.is_object()) throw ConfigInvalid("<document>", "expected an object");

  ControllerChoice controller = ControllerChoice::kDwdob;
  if (auto it = j.find("controller"); it != j.end()) {
    if (!it->is_string()) throw ConfigInvalid("controller", "expected a string");
    auto c = parse_controller(it->get<std::string>());
    if (!c) {
      throw ConfigInvalid("controller", "expected one of PD_l, PD_h, CWDOB, DWDOB");
    }
    controller = *c;
  }
  Scenario s = make_scenario(Preset::kNominal, controller);

  Reader r(j, "");
  std::string ignored;
  r.string("controller", ignored);
  r.string("name", s.name);
  r.unsigned64("seed", s.seed);
  r.object("gains", [&](Reader& g) {
    g.vector("kp", s.gains.kp);
    g.vector("kd", s.gains.kd);
  });
  r.object("model", [&](Reader& m) {
    m.numbers("link_lengths", s.model.link_lengths);
    m.numbers("link_masses", s.model.link_masses);
    m.number("gravity", s.model.gravity);
    m.numbers("joint_damping", s.model.joint_damping);
    m.numbers("joint_friction", s.model.joint_friction);
    m.number("friction_velocity", s.model.friction_velocity);
  });
  r.object("geometry", [&](Reader& g) {
    g.number("width", s.geom.width);
    g.number("depth", s.geom.depth);
    g.number("peg_width", s.geom.peg_width);
    g.number("peg_length", s.geom.peg_length);
    g.number("chamfer", s.geom.chamfer);
    g.number("wall_stiffness", s.geom.wall_stiffness);
    g.number("wall_damping", s.geom.wall_damping);
    g.number("friction_coeff", s.geom.friction_coeff);
    g.number("friction_velocity", s.geom.friction_velocity);
    std::vector<double> c{s.geom.center.x(), s.geom.center.y()};
    g.numbers("center", c);
    if (c.size() != 2) throw ConfigInvalid("geometry.center", "expected [x, y]");
    s.geom.center = {c[0], c[1]};
  });
  r.object("sim", [&](Reader& m) {
    m.number("control_dt", s.sim.control_dt);
    m.integer("physics_substeps", s.sim.physics_substeps);
    m.number("duration", s.sim.duration);
    m.vector("feedforward", s.sim.feedforward);
    m.vector("initial_pose", s.sim.initial_pose);
    m.number("elbow_sign", s.sim.elbow_sign);
    m.number("sensor_noise_std", s.sim.sensor_noise_std);
    m.number("sensor_moment_noise_std", s.sim.sensor_moment_noise_std);
    m.boolean("with_contact", s.sim.with_contact);
    m.number("observer_storage_weight", s.sim.observer_storage_weight);
    m.object("excitation", [&](Reader& e) {
      e.integer("axis", s.sim.excitation.axis);
      e.number("amplitude", s.sim.excitation.amplitude);
      e.number("start", s.sim.excitation.start);
      e.number("period", s.sim.excitation.period);
      e.integer("cycles", s.sim.excitation.cycles);
    });
  });
  r.object("observer", [&](Reader& o) {
    o.number("q_cutoff_hz", s.observer.q_cutoff_hz);
    o.numbers("composite_hz", s.observer.composite_hz);
    o.integer("diff_stages", s.observer.diff_stages);
    o.number("fdot_cutoff_hz", s.observer.fdot_cutoff_hz);
    o.number("task_damping", s.observer.task_damping);
  });
  r.vector("regulated_axes", s.regulated);
  r.object("mismatch", [&](Reader& m) {
    m.number("lambda_scale", s.mismatch.lambda_scale);
    m.matrix("lambda_offset", s.mismatch.lambda_offset);
  });
  r.object("limits", [&](Reader& l) {
    l.number("force_max", s.limits.force_max);
    l.number("moment_max", s.limits.moment_max);
  });
  r.finish();
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("<file>", "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

WrenchController make_controller(const Scenario& s) {
  ObserverKind kind = ObserverKind::kNone;
  if (s.controller == ControllerChoice::kCwdob) kind = ObserverKind::kContactWrench;
  if (s.controller == ControllerChoice::kDwdob) kind = ObserverKind::kDynamicWrench;
  return WrenchController(kind, s.gains, s.regulated,
                          s.observer.to_config(s.sim.control_dt), s.model,
                          s.mismatch);
}

// -------------------------------------------------------------- runs ------

Summary summarize(const Scenario& s, const Trace& trace) {
  Summary out;
  out.name = s.name;
  out.controller = s.controller;
  out.stopped = trace.stopped;
  out.stop_reason = trace.stop_reason;
  out.max_rho = trace.ticks.empty() ? 0.0 : trace.ticks.front().rho;
  for (const auto& t : trace.ticks) {
    out.max_force = std::max(out.max_force, force_norm(t.f_ext));
    out.max_moment = std::max(out.max_moment, moment_norm(t.f_ext));
    out.peak_residual =
        std::max(out.peak_residual, s.regulated.cwiseProduct(t.f_ext).norm());
    out.max_rho = std::max(out.max_rho, t.rho);
  }
  if (!trace.ticks.empty()) {
    const auto& last = trace.ticks.back();
    out.duration = last.t;
    out.final_depth = last.depth;
    out.final_e_port = last.e_port;
  }
  return out;
}

RunResult run_scenario(const Scenario& s) {
  s.validate();
  ClosedLoopSim sim(s.model, s.geom, s.sim, make_controller(s), s.limits, s.seed);
  RunResult r;
  r.trace = sim.run();
  r.summary = summarize(s, r.trace);
  return r;
}

std::string trace_csv_header(int dof) {
  std::string h = "t[s]";
  for (int i = 1; i <= dof; ++i) h += ",q" + std::to_string(i) + "[rad]";
  h +=
      ",depth[m],fx[N],fy[N],t_theta[N*m],fcx[N],fcy[N],fc_t[N*m],"
      "dhat_x[N],dhat_y[N],dhat_t[N*m],e_port[J],rho[J],stopped[-]";
  return h;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << trace_csv_header(trace.dof) << "\n";
  auto component = [](const Wrench& w, int i) {
    return i < w.size() ? w[i] : 0.0;
  };
  for (const auto& t : trace.ticks) {
    out << fmt9(t.t);
    for (Eigen::Index i = 0; i < t.q.size(); ++i) out << "," << fmt9(t.q[i]);
    out << "," << fmt9(t.depth);
    for (int i = 0; i < 3; ++i) out << "," << fmt9(component(t.f_ext, i));
    for (int i = 0; i < 3; ++i) out << "," << fmt9(component(t.applied, i));
    for (int i = 0; i < 3; ++i) out << "," << fmt9(component(t.d_hat, i));
    out << "," << fmt9(t.e_port) << "," << fmt9(t.rho) << ","
        << (t.stopped ? 1 : 0) << "\n";
  }
}

void write_summary(const Summary& s, std::ostream& out) {
  Json j;
  j["name"] = s.name;
  j["controller"] = std::string(to_string(s.controller));
  j["duration_s"] = s.duration;
  j["max_force_N"] = s.max_force;
  j["max_moment_Nm"] = s.max_moment;
  j["peak_residual"] = s.peak_residual;
  j["final_depth_m"] = s.final_depth;
  j["max_rho_J"] = s.max_rho;
  j["final_e_port_J"] = s.final_e_port;
  j["stopped"] = s.stopped;
  j["stop_reason"] = std::string(to_string(s.stop_reason));
  out << j.dump(2) << "\n";
}

ComparisonReport compare_controllers(const std::vector<Scenario>& scenarios) {
  if (scenarios.empty()) {
    throw IncompatibleScenarios("no scenarios to compare");
  }
  const Scenario& ref = scenarios.front();
  for (const auto& s : scenarios) {
    if (!same_model(s.model, ref.model)) {
      throw IncompatibleScenarios(s.name + ": arm model differs from " + ref.name);
    }
    if (!same_geometry(s.geom, ref.geom)) {
      throw IncompatibleScenarios(s.name + ": hole geometry differs from " +
                                  ref.name);
    }
    if (s.sim.initial_pose != ref.sim.initial_pose ||
        s.sim.elbow_sign != ref.sim.elbow_sign) {
      throw IncompatibleScenarios(s.name + ": initial pose differs from " +
                                  ref.name);
    }
  }

  ComparisonReport r;
  for (const auto& s : scenarios) r.runs.push_back(run_scenario(s));

  std::vector<const Summary*> order;
  for (const auto& run : r.runs) order.push_back(&run.summary);
  std::sort(order.begin(), order.end(), [](const Summary* a, const Summary* b) {
    if (a->final_depth != b->final_depth) return a->final_depth > b->final_depth;
    return a->name < b->name;
  });
  for (const auto* s : order) r.depth_ranking.push_back(s->name);
  std::sort(order.begin(), order.end(), [](const Summary* a, const Summary* b) {
    if (a->peak_residual != b->peak_residual) {
      return a->peak_residual < b->peak_residual;
    }
    return a->name < b->name;
  });
  for (const auto* s : order) r.residual_ranking.push_back(s->name);
  return r;
}

void write_comparison_csv(const ComparisonReport& r, std::ostream& out) {
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    if (i > 0) out << "\n";
    out << "# scenario=" << r.runs[i].summary.name
        << " controller=" << to_string(r.runs[i].summary.controller) << "\n";
    write_trace_csv(r.runs[i].trace, out);
  }
}

void write_ranking(const ComparisonReport& r, std::ostream& out) {
  Json j;
  j["depth_ranking"] = r.depth_ranking;
  j["residual_ranking"] = r.residual_ranking;
  Json runs = Json::array();
  for (const auto& run : r.runs) {
    std::ostringstream s;
    write_summary(run.summary, s);
    runs.push_back(Json::parse(s.str()));
  }
  j["summaries"] = runs;
  out << j.dump(2) << "\n";
}

// -------------------------------------------------------------- sweep -----

void SweepSpec::validate() const {
  if (misalignments.empty()) {
    throw ConfigInvalid("sweep.misalignments", "must not be empty");
  }
  if (trials != static_cast<int>(misalignments.size())) {
    throw ConfigInvalid("sweep.trials", "must equal the number of misalignments");
  }
  for (double m : misalignments) {
    if (!std::isfinite(m)) throw ConfigInvalid("sweep.misalignments", "not finite");
  }
  base.validate();
}

std::vector<double> uniform_misalignments(int count, double bound) {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {0.0};
  for (int i = 0; i < count; ++i) {
    out.push_back(-bound + 2.0 * bound * i / (count - 1));
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t base_seed, int index) {
  // splitmix64 of (base, index)
  std::uint64_t z = base_seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

SweepReport misalignment_sweep(const SweepSpec& spec) {
  spec.validate();
  const int n = spec.trials;
  std::vector<TrialResult> results(static_cast<std::size_t>(n));

  auto run_trial = [&spec](int i) {
    Scenario s = spec.base;
    const double tilt = spec.misalignments[static_cast<std::size_t>(i)];
    s.name = spec.base.name + "_trial" + std::to_string(i);
    s.sim.initial_pose[2] = -kHalfPi + tilt;
    s.seed = trial_seed(spec.base.seed, i);
    const RunResult run = run_scenario(s);
    TrialResult t;
    t.index = i;
    t.tilt = tilt;
    t.seed = s.seed;
    t.final_depth = run.summary.final_depth;
    t.stop_reason = run.summary.stop_reason;
    t.success = !run.summary.stopped &&
                run.summary.final_depth >= kSuccessDepthFraction * s.geom.depth;
    t.orientation.reserve(run.trace.ticks.size());
    for (const auto& tick : run.trace.ticks) {
      t.orientation.push_back(tick.pose[2] + kHalfPi);
    }
    return t;
  };

  const int workers = std::max(1u, std::thread::hardware_concurrency());
  for (int begin = 0; begin < n; begin += workers) {
    std::vector<std::future<TrialResult>> batch;
    const int end = std::min(n, begin + workers);
    for (int i = begin; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, run_trial, i));
    }
    for (int i = begin; i < end; ++i) {
      results[static_cast<std::size_t>(i)] = batch[static_cast<std::size_t>(i - begin)].get();
    }
  }

  SweepReport report;
  report.trials = std::move(results);
  for (const auto& t : report.trials) report.success_count += t.success ? 1 : 0;
  return report;
}

void write_sweep_csv(const SweepReport& r, std::ostream& out) {
  out << "trial,tilt[rad],seed,success,final_depth[m],stop_reason\n";
  for (const auto& t : r.trials) {
    out << t.index << "," << fmt9(t.tilt) << "," << t.seed << ","
        << (t.success ? 1 : 0) << "," << fmt9(t.final_depth) << ","
        << to_string(t.stop_reason) << "\n";
  }
}

}  // namespace dwdob
