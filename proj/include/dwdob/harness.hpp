#pragma once

// Scenario configuration, experiment orchestration and report emission.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dwdob/contact_env.hpp"

namespace dwdob {

enum class ControllerChoice { kPdLow, kPdHigh, kCwdob, kDwdob };

std::string_view to_string(ControllerChoice c);
std::optional<ControllerChoice> parse_controller(std::string_view s);

enum class Preset { kNominal, kTight, kNoisy, kAggressive };

std::string_view to_string(Preset p);
std::optional<Preset> parse_preset(std::string_view s);

// Observer filter settings as configured (frequencies in Hz).
struct ObserverSettings {
  double q_cutoff_hz = 15.0;
  std::vector<double> composite_hz{100.0, 15.0};
  int diff_stages = 2;
  double fdot_cutoff_hz = 1.0;
  double task_damping = 0.0;

  ObserverConfig to_config(double dt) const;
};

struct Scenario {
  std::string name;
  ControllerChoice controller = ControllerChoice::kDwdob;
  PdGains gains;
  ManipulatorModel model;
  HoleGeometry geom;
  SimConfig sim;
  MismatchConfig mismatch;
  ObserverSettings observer;
  Vector regulated;  // 1 on regulated axes
  SafetyLimits limits;
  std::uint64_t seed = 1;

  // Throws ConfigInvalid naming the offending field.
  void validate() const;
};

// Desk-scale three-link arm carrying the peg.
ManipulatorModel peg_arm();

Scenario make_scenario(Preset preset, ControllerChoice controller);

// JSON text with fixed key order; parse(serialize(s)) reproduces s exactly.
std::string serialize_scenario(const Scenario& s);
// Fields missing from `text` keep the nominal defaults for the named
// controller. Throws ConfigInvalid.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

WrenchController make_controller(const Scenario& s);

struct Summary {
  std::string name;
  ControllerChoice controller = ControllerChoice::kDwdob;
  double duration = 0.0;     // simulated time reached
  double max_force = 0.0;    // N
  double max_moment = 0.0;   // N*m
  double peak_residual = 0.0;  // peak norm of the regulated wrench components
  double final_depth = 0.0;  // m
  double max_rho = 0.0;      // J
  double final_e_port = 0.0; // J
  bool stopped = false;
  StopReason stop_reason = StopReason::kNone;
};

struct RunResult {
  Trace trace;
  Summary summary;
};

RunResult run_scenario(const Scenario& s);
Summary summarize(const Scenario& s, const Trace& trace);

// Trace CSV: t, q1..qn, depth, fx, fy, t_theta, fcx, fcy, fc_t, dhat_x,
// dhat_y, dhat_t, e_port, rho, stopped. Nine significant digits.
void write_trace_csv(const Trace& trace, std::ostream& out);
std::string trace_csv_header(int dof);
void write_summary(const Summary& s, std::ostream& out);

struct ComparisonReport {
  std::vector<RunResult> runs;               // in input order
  std::vector<std::string> depth_ranking;    // deepest first
  std::vector<std::string> residual_ranking; // smallest peak first
};

// Scenarios must share model, geometry and initial pose.
ComparisonReport compare_controllers(const std::vector<Scenario>& scenarios);
void write_comparison_csv(const ComparisonReport& r, std::ostream& out);
void write_ranking(const ComparisonReport& r, std::ostream& out);

struct SweepSpec {
  Scenario base;
  std::vector<double> misalignments;  // initial tilt, rad
  int trials = 15;

  void validate() const;
};

// `count` tilts uniformly spaced in [-bound, bound].
std::vector<double> uniform_misalignments(int count, double bound = 0.02);

struct TrialResult {
  int index = 0;
  double tilt = 0.0;
  std::uint64_t seed = 0;
  bool success = false;
  double final_depth = 0.0;
  StopReason stop_reason = StopReason::kNone;
  std::vector<double> orientation;  // tilt per tick, rad
};

struct SweepReport {
  std::vector<TrialResult> trials;  // sorted by index
  int success_count = 0;
};

// Final depth >= 90 % of the hole and no safety stop.
inline constexpr double kSuccessDepthFraction = 0.9;

std::uint64_t trial_seed(std::uint64_t base_seed, int index);

// Trials run concurrently; the report does not depend on scheduling.
SweepReport misalignment_sweep(const SweepSpec& spec);
void write_sweep_csv(const SweepReport& r, std::ostream& out);

}  // namespace dwdob
