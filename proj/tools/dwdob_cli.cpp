// dwdob_cli: run, compare and sweep the peg-in-hole scenarios.
//
// Exit codes: 0 success, 1 configuration error, 2 safety stop (run only).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dwdob/harness.hpp"

namespace fs = std::filesystem;
using namespace dwdob;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSafetyStop = 2;

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string preset = "nominal";
  std::string controller;  // empty: from --config, else DWDOB
  int trials = 15;
  double bound = 0.02;
};

Scenario scenario_for(const Options& o, ControllerChoice controller) {
  Scenario s;
  if (!o.config.empty()) {
    s = load_scenario(o.config);
    if (s.controller != controller) {
      // Same world, different controller: swap the controller and its gains.
      const Scenario d = make_scenario(Preset::kNominal, controller);
      s.controller = controller;
      s.gains = d.gains;
      s.name = s.name + "_" + std::string(to_string(controller));
    }
  } else {
    auto p = parse_preset(o.preset);
    if (!p) throw ConfigInvalid("--preset", "unknown preset " + o.preset);
    s = make_scenario(*p, controller);
  }
  if (o.seed) s.seed = *o.seed;
  s.validate();
  return s;
}

ControllerChoice controller_for(const Options& o) {
  if (o.controller.empty()) {
    return o.config.empty() ? ControllerChoice::kDwdob
                            : load_scenario(o.config).controller;
  }
  auto c = parse_controller(o.controller);
  if (!c) throw ConfigInvalid("--controller", "unknown controller " + o.controller);
  return *c;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigInvalid("--out", "cannot write " + path.string());
  return f;
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigInvalid("--out", "cannot create " + dir.string());
  return dir;
}

int cmd_run(const Options& o) {
  const Scenario s = scenario_for(o, controller_for(o));
  const RunResult r = run_scenario(s);
  const fs::path dir = out_dir(o);
  {
    auto f = open_out(dir / "trace.csv");
    write_trace_csv(r.trace, f);
  }
  {
    auto f = open_out(dir / "summary.json");
    write_summary(r.summary, f);
  }
  {
    auto f = open_out(dir / "scenario.json");
    f << serialize_scenario(s);
  }
  write_summary(r.summary, std::cout);
  if (r.summary.stopped) {
    std::cerr << "safety stop (" << to_string(r.summary.stop_reason) << ") at t="
              << r.summary.duration << " s\n";
    return kExitSafetyStop;
  }
  return kExitOk;
}

int cmd_compare(const Options& o) {
  std::vector<Scenario> scenarios;
  for (auto c : {ControllerChoice::kPdLow, ControllerChoice::kPdHigh,
                 ControllerChoice::kCwdob, ControllerChoice::kDwdob}) {
    scenarios.push_back(scenario_for(o, c));
  }
  const ComparisonReport r = compare_controllers(scenarios);
  const fs::path dir = out_dir(o);
  {
    auto f = open_out(dir / "comparison.csv");
    write_comparison_csv(r, f);
  }
  {
    auto f = open_out(dir / "ranking.json");
    write_ranking(r, f);
  }
  write_ranking(r, std::cout);
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  SweepSpec spec;
  spec.base = scenario_for(o, controller_for(o));
  spec.trials = o.trials;
  spec.misalignments = uniform_misalignments(o.trials, o.bound);
  const SweepReport r = misalignment_sweep(spec);
  const fs::path dir = out_dir(o);
  {
    auto f = open_out(dir / "sweep.csv");
    write_sweep_csv(r, f);
  }
  write_sweep_csv(r, std::cout);
  std::cout << "success " << r.success_count << "/" << r.trials.size() << "\n";
  return kExitOk;
}

int cmd_validate(const Options& o) {
  const Scenario s = scenario_for(o, controller_for(o));
  std::cout << serialize_scenario(s);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wrench-observer peg-in-hole simulator"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario JSON file");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "noise seed override");
    sub->add_option("--preset", o.preset, "nominal | tight | noisy | aggressive")
        ->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "simulate one controller");
  add_common(run);
  run->add_option("--controller", o.controller, "PD_l | PD_h | CWDOB | DWDOB");

  auto* compare = app.add_subcommand("compare", "run all four controllers");
  add_common(compare);

  auto* sweep = app.add_subcommand("sweep", "initial misalignment sweep");
  add_common(sweep);
  sweep->add_option("--controller", o.controller);
  sweep->add_option("--trials", o.trials)->capture_default_str();
  sweep->add_option("--bound", o.bound, "max |tilt|, rad")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "check a scenario and print it");
  add_common(validate);
  validate->add_option("--controller", o.controller);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(o);
    if (*compare) return cmd_compare(o);
    if (*sweep) return cmd_sweep(o);
    if (*validate) return cmd_validate(o);
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IncompatibleScenarios& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
