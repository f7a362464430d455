#include "liouctl/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <thread>

namespace liouctl {

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  if (cfg.output_dir.empty()) return "";
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

void write_table(const ExperimentConfig& cfg, const std::string& name, const CsvTable& t) {
  const std::string p = out_path(cfg, name);
  if (!p.empty()) t.write(p);
}

double total_energy(const ControlField& f) {
  double e = 0.0;
  for (double x : f.energy()) e += x;
  return e;
}

/// Runs task(i) for i in [0, n) on at most `workers` threads; results land in caller-owned slots.
void parallel_for(int n, int workers, const std::function<void(int)>& task) {
  const int threads = std::max(1, std::min(workers, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

HilbertOperator ground_state() {
  HilbertOperator p = HilbertOperator::Zero(2, 2);
  p(0, 0) = 1.0;
  return p;
}

CsvTable history_table(const OptimizationTrace& trace) {
  std::vector<std::string> cols{"iteration", "objective", "infidelity"};
  for (const auto& n : trace.field.names()) cols.push_back("energy_" + n);
  cols.push_back("rejected");
  CsvTable t(cols);
  for (const auto& r : trace.history) {
    std::vector<double> row{static_cast<double>(r.iteration), r.objective, r.infidelity};
    row.insert(row.end(), r.energy.begin(), r.energy.end());
    row.push_back(r.rejected_updates);
    t.add_row(row);
  }
  return t;
}

CsvTable ancilla_table(const AncillaSeries& s) {
  std::vector<std::string> cols{"t"};
  for (std::size_t k = 0; k < s.population.size(); ++k) cols.push_back("state" + std::to_string(k));
  CsvTable t(cols);
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    std::vector<double> row{s.times[i]};
    for (const auto& p : s.population) row.push_back(p[i]);
    t.add_row(row);
  }
  return t;
}

}  // namespace

void check_compatible(const FieldCheckpoint& cp, const GateSpec& spec) {
  if (cp.gate != spec.name)
    throw ConfigError("checkpoint is for gate '" + cp.gate + "', config selects '" + spec.name + "'");
  if (std::abs(cp.field.horizon() - spec.horizon) > 1e-9 * std::max(1.0, spec.horizon))
    throw ConfigError("checkpoint horizon does not match the gate horizon");
  if (cp.field.n_channels() != static_cast<int>(spec.controls.size()))
    throw ConfigError("checkpoint channel count does not match the gate");
  for (int k = 0; k < cp.field.n_channels(); ++k)
    if (cp.field.names()[static_cast<std::size_t>(k)] != spec.controls[static_cast<std::size_t>(k)].name)
      throw ConfigError("checkpoint channel names do not match the gate");
}

ControlField initial_field(const ExperimentConfig& cfg, const GateSpec& spec) {
  if (cfg.field.checkpoint.empty())
    return seed_field(spec, cfg.propagator.dt, cfg.field.fwhm, cfg.field.perturbation, cfg.field.seed);
  FieldCheckpoint cp = read_checkpoint(cfg.field.checkpoint);
  check_compatible(cp, spec);
  if (cp.field.n_steps() != step_count(0.0, spec.horizon, cfg.propagator.dt))
    throw ConfigError("checkpoint grid does not match propagator.dt");
  return cp.field;
}

BaselineResult run_baseline(const ExperimentConfig& cfg) {
  cfg.validate();
  const GateSpec spec = cfg.gate.build();
  ControlProblem problem(spec, NoiseModel{});
  BaselineResult r;
  r.trace = krotov_optimize(problem, initial_field(cfg, spec), cfg.optimizer);
  r.if_u = r.trace.final_infidelity;
  r.if_u_propagated = evaluate_semiglobal(problem, r.trace.field, cfg.propagator).infidelity;
  r.checkpoint.gate = spec.name;
  r.checkpoint.field = r.trace.field;
  r.checkpoint.config_hash = cfg.hash();
  r.checkpoint.iterations = r.trace.iterations();
  r.checkpoint.infidelity = r.if_u;
  const std::string cp = out_path(cfg, spec.name + "_baseline.field");
  if (!cp.empty()) write_checkpoint(cp, r.checkpoint);
  write_table(cfg, spec.name + "_baseline.csv", history_table(r.trace));
  CsvTable report({"IF_U", "IF_U_propagated", "iterations", "energy", "converged"});
  report.add_row({r.if_u, r.if_u_propagated, static_cast<double>(r.checkpoint.iterations),
                  total_energy(r.trace.field), r.trace.converged() ? 1.0 : 0.0});
  write_table(cfg, spec.name + "_report.csv", report);
  return r;
}

SweepOutcome run_noise_sweep(const ExperimentConfig& cfg, const FieldCheckpoint& baseline) {
  cfg.validate();
  if (cfg.noise.kind == NoiseKind::None) throw ConfigError("sweep needs noise.kind amplitude or phase");
  const GateSpec spec = cfg.gate.build();
  check_compatible(baseline, spec);
  const ControlField& reference = baseline.field;
  const std::vector<double> grid = cfg.noise.grid();
  const int n = static_cast<int>(grid.size());

  SweepOutcome out;
  out.result.gate = spec.name;
  out.result.noise = to_string(cfg.noise.kind);
  const double if_u = evaluate(ControlProblem(spec, NoiseModel{}), reference).infidelity;
  const double e_ref = total_energy(reference);
  SweepRow zero;
  zero.gamma = 0.0;
  zero.if_u = zero.if_n = zero.if_f = if_u;
  zero.energy_n = zero.energy_f = e_ref;
  zero.reason = "reference";

  std::vector<SweepRow> rows(static_cast<std::size_t>(n));
  std::vector<ControlField> fields(static_cast<std::size_t>(n));
  std::vector<OptimizationTrace> traces(static_cast<std::size_t>(n));
  parallel_for(n, cfg.workers, [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    ControlProblem noisy(spec, NoiseModel{cfg.noise.kind, grid[idx]});
    SweepRow& row = rows[idx];
    row.gamma = grid[idx];
    row.if_u = if_u;
    row.if_n = evaluate(noisy, reference).infidelity;
    traces[idx] = krotov_optimize(noisy, reference, cfg.reoptimizer);
    row.if_f = traces[idx].final_infidelity;
    row.energy_n = e_ref;
    row.energy_f = total_energy(traces[idx].field);
    row.iterations = traces[idx].iterations();
    row.reason = to_string(traces[idx].reason);
    fields[idx] = traces[idx].field;
  });

  out.result.rows.push_back(zero);
  out.fields.push_back(reference);
  out.traces.emplace_back();
  for (int i = 0; i < n; ++i) {
    out.result.rows.push_back(rows[static_cast<std::size_t>(i)]);
    out.fields.push_back(std::move(fields[static_cast<std::size_t>(i)]));
    out.traces.push_back(std::move(traces[static_cast<std::size_t>(i)]));
  }

  CsvTable t({"gamma", "IF_U", "IF_n", "IF_F", "log10_R", "log10_NC", "energy_n", "energy_F", "iterations"});
  for (const auto& r : out.result.rows) {
    const double log_r = std::log10(degradation_ratio(r.if_n, clipped_infidelity(r.if_u)));
    const double log_nc = std::log10(noise_cancellation(r.if_n, clipped_infidelity(r.if_f)));
    t.add_row({r.gamma, r.if_u, r.if_n, r.if_f, log_r, log_nc, r.energy_n, r.energy_f,
               static_cast<double>(r.iterations)});
  }
  const std::string stem = "sweep_" + spec.name + "_" + out.result.noise;
  write_table(cfg, stem + ".csv", t);
  for (int i = 1; i <= n; ++i) {
    const std::string p = out_path(cfg, stem + "_" + std::to_string(i) + ".field");
    if (p.empty()) continue;
    FieldCheckpoint cp{spec.name, out.fields[static_cast<std::size_t>(i)], cfg.hash(),
                       out.result.rows[static_cast<std::size_t>(i)].iterations,
                       out.result.rows[static_cast<std::size_t>(i)].if_f};
    write_checkpoint(p, cp);
  }
  return out;
}

StagedResult run_staged(const ExperimentConfig& cfg) {
  cfg.validate();
  GateConfig g1 = cfg.gate;
  g1.name = "staged_pauli_x";
  GateConfig g2 = cfg.gate;
  g2.name = "entangling";
  const GateSpec stage1 = g1.build();
  const GateSpec stage2 = g2.build();

  std::vector<double> gammas{0.0};
  if (cfg.noise.kind != NoiseKind::None)
    for (double g : cfg.noise.grid()) gammas.push_back(g);
  const int n = static_cast<int>(gammas.size());
  const std::vector<HilbertOperator> states = block_states(qubit_block_projector());
  const ControlField seed = initial_field(cfg, stage1);

  StagedResult res;
  res.rows.resize(static_cast<std::size_t>(n));
  std::vector<AncillaSeries> series(static_cast<std::size_t>(n));
  parallel_for(n, cfg.workers, [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    const NoiseModel noise{gammas[idx] > 0 ? cfg.noise.kind : NoiseKind::None, gammas[idx]};
    ControlProblem p1(stage1, noise);
    const auto t1 = krotov_optimize(p1, seed, cfg.optimizer);
    const auto ev = evaluate(p1, t1.field);
    series[idx] = ancilla_population(ev.maps, t1.field.grid(), ancilla_projector(), states, stage1.basis);
    ControlProblem p2(stage2, noise);
    const auto t2 = krotov_optimize(p2, t1.field, cfg.optimizer);
    StagedRow& row = res.rows[idx];
    row.gamma = gammas[idx];
    row.stage1_if = t1.final_infidelity;
    row.ancilla_max = series[idx].max;
    row.stage2_if = t2.final_infidelity;
    row.stage2_iterations = t2.iterations();
  });

  res.pilot_if = res.rows.front().stage2_if;
  res.pilot_iterations = res.rows.front().stage2_iterations;
  GateSpec cold_spec = stage2;
  for (auto& c : cold_spec.controls) c.guess_amplitude = 0.0;
  const ControlField cold =
      seed_field(cold_spec, cfg.propagator.dt, cfg.field.fwhm, cfg.staged.cold_perturbation, cfg.staged.cold_seed);
  const auto tc = krotov_optimize(ControlProblem(stage2, NoiseModel{}), cold, cfg.optimizer);
  res.cold_if = tc.final_infidelity;
  res.cold_iterations = tc.iterations();
  res.low = series.size() > 1 ? series[1] : series[0];
  res.high = series.back();

  CsvTable t({"gamma", "stage1_IF", "ancilla_max", "stage2_IF", "stage2_iterations"});
  for (const auto& r : res.rows)
    t.add_row({r.gamma, r.stage1_if, r.ancilla_max, r.stage2_if, static_cast<double>(r.stage2_iterations)});
  write_table(cfg, "staged.csv", t);
  CsvTable ab({"pilot_IF", "pilot_iterations", "cold_IF", "cold_iterations"});
  ab.add_row({res.pilot_if, static_cast<double>(res.pilot_iterations), res.cold_if,
              static_cast<double>(res.cold_iterations)});
  write_table(cfg, "staged_ab.csv", ab);
  write_table(cfg, "ancilla_low.csv", ancilla_table(res.low));
  write_table(cfg, "ancilla_high.csv", ancilla_table(res.high));
  return res;
}

TrajectoryResult run_trajectory(const ExperimentConfig& cfg, const FieldCheckpoint& field) {
  cfg.validate();
  const GateSpec spec = cfg.gate.build();
  if (spec.dim() != 2) throw DimensionError("trajectory needs a two-level gate");
  check_compatible(field, spec);
  if (cfg.noise.kind == NoiseKind::None) throw ConfigError("trajectory needs noise.kind amplitude or phase");
  const NoiseModel noise{cfg.noise.kind, cfg.trajectory_gamma};
  const auto grid = field.field.grid();
  const HilbertOperator rho0 = ground_state();

  TrajectoryResult r;
  ControlProblem clean(spec, NoiseModel{});
  ControlProblem noisy(spec, noise);
  r.reference = bloch_trajectory(evaluate(clean, field.field).maps, grid, rho0, spec.basis);
  r.noisy = bloch_trajectory(evaluate(noisy, field.field).maps, grid, rho0, spec.basis);
  const auto mitigated = krotov_optimize(noisy, field.field, cfg.reoptimizer);
  r.mitigated = bloch_trajectory(evaluate(noisy, mitigated.field).maps, grid, rho0, spec.basis);

  CsvTable t({"run", "t", "x", "y", "z", "radius"});
  int run = 0;
  for (const auto* traj : {&r.reference, &r.noisy, &r.mitigated}) {
    for (const auto& p : *traj) t.add_row({static_cast<double>(run), p.t, p.x, p.y, p.z, p.radius});
    ++run;
  }
  write_table(cfg, "trajectory.csv", t);
  return r;
}

TimekeepingResult run_timekeeping_compare(const ExperimentConfig& cfg, const FieldCheckpoint& field) {
  cfg.validate();
  const GateSpec spec = cfg.gate.build();
  if (spec.name != "hadamard") throw ConfigError("timekeeping comparison needs the hadamard gate");
  if (cfg.noise.kind != NoiseKind::Phase) throw ConfigError("timekeeping comparison needs phase noise");
  check_compatible(field, spec);

  TimekeepingResult r;
  r.gammas = cfg.noise.grid();
  r.f_numeric.resize(r.gammas.size());
  parallel_for(static_cast<int>(r.gammas.size()), cfg.workers, [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    ControlProblem p(spec, NoiseModel{NoiseKind::Phase, r.gammas[idx]});
    r.f_numeric[idx] = average_gate_fidelity(evaluate(p, field.field).objective, spec.dim());
  });
  r.fit = fit_timekeeping(r.gammas, r.f_numeric);
  for (double g : r.gammas) r.f_analytic.push_back(timekeeping_fidelity(r.fit.theta, 1.0 / g));

  CsvTable t({"gamma", "F_numeric", "F_analytic"});
  for (std::size_t i = 0; i < r.gammas.size(); ++i) t.add_row({r.gammas[i], r.f_numeric[i], r.f_analytic[i]});
  write_table(cfg, "timekeeping.csv", t);
  CsvTable f({"theta", "residual_norm", "curve_range", "relative_residual"});
  f.add_row({r.fit.theta, r.fit.residual_norm, r.fit.curve_range, r.fit.relative_residual()});
  write_table(cfg, "timekeeping_fit.csv", f);
  return r;
}

}  // namespace liouctl
