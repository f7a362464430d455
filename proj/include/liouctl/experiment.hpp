#pragma once

// Experiment workflows behind the CLI: baseline, noise sweep, staged ancilla strategy,
// Bloch trajectories and the timekeeping comparison. Each writes its CSV/checkpoint files
// into cfg.output_dir when that is non-empty.

#include <string>
#include <vector>

#include "liouctl/analysis.hpp"
#include "liouctl/checkpoint.hpp"
#include "liouctl/config.hpp"
#include "liouctl/krotov.hpp"

namespace liouctl {

/// Guess field from cfg.field.checkpoint when set, else the analytic seed on the propagator grid.
ControlField initial_field(const ExperimentConfig& cfg, const GateSpec& spec);

/// Throws ConfigError unless the checkpoint fits the gate (name, horizon, channels).
void check_compatible(const FieldCheckpoint& cp, const GateSpec& spec);

struct BaselineResult {
  OptimizationTrace trace;
  double if_u = 1.0;             // dense step exponentials, the optimizer's own value
  double if_u_propagated = 1.0;  // same field through the semi-global propagator
  FieldCheckpoint checkpoint;
};

/// Noiseless optimization. Writes <gate>_baseline.field, the iteration history
/// <gate>_baseline.csv and a one-row <gate>_report.csv.
BaselineResult run_baseline(const ExperimentConfig& cfg);

struct SweepOutcome {
  SweepResult result;
  std::vector<ControlField> fields;  // re-optimized field per row (row 0 is the reference)
  std::vector<OptimizationTrace> traces;
};

/// gamma = 0 row, then for every grid point IF_n of the reference field and IF_F after
/// re-optimization under noise. Writes sweep_<gate>_<noise>.csv.
SweepOutcome run_noise_sweep(const ExperimentConfig& cfg, const FieldCheckpoint& baseline);

struct StagedRow {
  double gamma = 0.0;
  double stage1_if = 1.0;
  double ancilla_max = 0.0;
  double stage2_if = 1.0;
  int stage2_iterations = 0;
};

struct StagedResult {
  std::vector<StagedRow> rows;
  // gamma = 0 A/B: entangling optimization seeded by stage 1 vs a cold random seed.
  double pilot_if = 1.0;
  int pilot_iterations = 0;
  double cold_if = 1.0;
  int cold_iterations = 0;
  AncillaSeries low, high;
};

/// Stage 1: partial Pauli-X target with the coupled two-qubit Hamiltonian under cfg noise.
/// Stage 2: entangling gate seeded from stage 1. Writes staged.csv, staged_ab.csv and
/// ancilla_low.csv / ancilla_high.csv.
StagedResult run_staged(const ExperimentConfig& cfg);

struct TrajectoryResult {
  std::vector<BlochPoint> reference, noisy, mitigated;
};

/// Bloch trajectories of |0><0| for the reference field without and with noise, and for the
/// field re-optimized under noise. Writes trajectory.csv with run = 0, 1, 2.
TrajectoryResult run_trajectory(const ExperimentConfig& cfg, const FieldCheckpoint& field);

struct TimekeepingResult {
  std::vector<double> gammas;
  std::vector<double> f_numeric;
  std::vector<double> f_analytic;
  TimekeepingFit fit;
};

/// Average gate fidelity of the reference field under phase noise against the timekeeping
/// form with a fitted pulse area. Writes timekeeping.csv and timekeeping_fit.csv.
TimekeepingResult run_timekeeping_compare(const ExperimentConfig& cfg, const FieldCheckpoint& field);

}  // namespace liouctl
