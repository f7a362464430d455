// liouctl: command-line runner for the experiment workflows.
//
//   liouctl <baseline|sweep|staged|trajectory|timekeeping> --config FILE [--out DIR]
//           [--checkpoint FIELD] [--set key=value]... [--workers N]
//
// Exit codes: 0 success, 1 configuration/input error, 2 non-convergence.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "liouctl/experiment.hpp"

using namespace liouctl;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNotConverged = 2;

struct Options {
  std::string config;
  std::string out;
  std::string checkpoint;
  std::vector<std::string> overrides;
  int workers = 0;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    set_config_value(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.workers > 0) cfg.workers = o.workers;
  cfg.validate();
  return cfg;
}

void print_baseline(const BaselineResult& b) {
  double energy = 0.0;
  for (double e : b.trace.field.energy()) energy += e;
  std::printf("baseline %s: IF_U=%.6e (propagated %.6e) iterations=%d energy=%.6e reason=%s\n",
              b.checkpoint.gate.c_str(), b.if_u, b.if_u_propagated, b.checkpoint.iterations, energy,
              to_string(b.trace.reason).c_str());
}

// Reference field for the analysis subcommands: --checkpoint when given, else a fresh baseline.
FieldCheckpoint reference(const ExperimentConfig& cfg, const Options& o, bool& converged) {
  converged = true;
  if (!o.checkpoint.empty()) {
    FieldCheckpoint cp = read_checkpoint(o.checkpoint);
    if (!cp.config_hash.empty() && cp.config_hash != cfg.hash())
      std::fprintf(stderr, "note: checkpoint was produced by config %s, running %s\n", cp.config_hash.c_str(),
                   cfg.hash().c_str());
    return cp;
  }
  ExperimentConfig base = cfg;
  base.noise.kind = NoiseKind::None;
  const BaselineResult b = run_baseline(base);
  print_baseline(b);
  converged = b.trace.converged();
  return b.checkpoint;
}

int cmd_baseline(const Options& o) {
  const ExperimentConfig cfg = load(o);
  if (cfg.noise.kind != NoiseKind::None)
    throw ConfigError("baseline runs without noise; set noise.kind = none or use the sweep command");
  const BaselineResult b = run_baseline(cfg);
  print_baseline(b);
  return b.trace.converged() ? kOk : kNotConverged;
}

int cmd_sweep(const Options& o) {
  const ExperimentConfig cfg = load(o);
  bool converged = true;
  const FieldCheckpoint ref = reference(cfg, o, converged);
  const SweepOutcome s = run_noise_sweep(cfg, ref);
  std::printf("%-14s %-14s %-14s %-10s %s\n", "gamma", "IF_n", "IF_F", "log10_NC", "iterations");
  for (const auto& r : s.result.rows)
    std::printf("%-14.6e %-14.6e %-14.6e %-10.4f %d\n", r.gamma, r.if_n, r.if_f,
                std::log10(noise_cancellation(r.if_n, clipped_infidelity(r.if_f))), r.iterations);
  std::printf("max log10 NC = %.4f\n", s.result.max_log10_nc());
  return converged ? kOk : kNotConverged;
}

int cmd_staged(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const StagedResult s = run_staged(cfg);
  std::printf("%-14s %-14s %-14s %-14s %s\n", "gamma", "stage1_IF", "ancilla_max", "stage2_IF", "iterations");
  for (const auto& r : s.rows)
    std::printf("%-14.6e %-14.6e %-14.6e %-14.6e %d\n", r.gamma, r.stage1_if, r.ancilla_max, r.stage2_if,
                r.stage2_iterations);
  std::printf("gamma=0 stage 2: pilot IF=%.6e (%d it), cold IF=%.6e (%d it)\n", s.pilot_if, s.pilot_iterations,
              s.cold_if, s.cold_iterations);
  return s.pilot_if <= cfg.optimizer.target_infidelity ? kOk : kNotConverged;
}

int cmd_trajectory(const Options& o) {
  const ExperimentConfig cfg = load(o);
  bool converged = true;
  const FieldCheckpoint ref = reference(cfg, o, converged);
  const TrajectoryResult t = run_trajectory(cfg, ref);
  auto radius = [](const std::vector<BlochPoint>& v) { return v.empty() ? 0.0 : v.back().radius; };
  std::printf("final radius: reference %.6f, noisy %.6f, mitigated %.6f\n", radius(t.reference), radius(t.noisy),
              radius(t.mitigated));
  return converged ? kOk : kNotConverged;
}

int cmd_timekeeping(const Options& o) {
  const ExperimentConfig cfg = load(o);
  bool converged = true;
  const FieldCheckpoint ref = reference(cfg, o, converged);
  const TimekeepingResult t = run_timekeeping_compare(cfg, ref);
  std::printf("theta=%.6f residual=%.6e range=%.6e relative=%.4f\n", t.fit.theta, t.fit.residual_norm,
              t.fit.curve_range, t.fit.relative_residual());
  return converged ? kOk : kNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Liouville-space optimal control with controller noise"};
  app.require_subcommand(1);
  Options opt;
  int (*handler)(const Options&) = nullptr;

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
    bool takes_checkpoint;
  };
  const Command commands[] = {
      {"baseline", "noiseless reference optimization", cmd_baseline, false},
      {"sweep", "evaluate and re-optimize the reference field over the noise grid", cmd_sweep, true},
      {"staged", "ancilla-staged pilot field for the entangling gate", cmd_staged, false},
      {"trajectory", "Bloch trajectories of the reference and mitigated fields", cmd_trajectory, true},
      {"timekeeping", "Hadamard fidelity vs phase noise against the timekeeping form", cmd_timekeeping, true},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("-c,--config", opt.config, "experiment config file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", opt.out, "output directory (overrides run.output_dir)");
    if (c.takes_checkpoint)
      sub->add_option("--checkpoint", opt.checkpoint, "reference field; a baseline is run when omitted")
          ->check(CLI::ExistingFile);
    sub->add_option("--set", opt.overrides, "override a config key (key=value)");
    sub->add_option("-j,--workers", opt.workers, "worker threads (overrides run.workers)");
    sub->callback([&handler, run = c.run] { handler = run; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    return handler(opt);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const CheckpointError& e) {
    std::fprintf(stderr, "checkpoint error: %s\n", e.what());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  return kConfigError;
}
