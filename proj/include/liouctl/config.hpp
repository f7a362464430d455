#pragma once

// Experiment configuration: flat "section.key = value" text, '#' comments.
//
// Every key has a default, unknown keys are rejected, and canonical() prints all keys
// in a fixed order with round-trip precision so the text (and its hash) identifies a run.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "liouctl/gates.hpp"
#include "liouctl/krotov.hpp"
#include "liouctl/semiglobal.hpp"

namespace liouctl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GateConfig {
  std::string name = "hadamard";  // hadamard | pauli_x | entangling | staged_pauli_x
  double u = 1.0;
  double a_x = 1.0;
  double a_y = 1.0;
  double phi = 0.0;
  double cycles = 2.0;
  double horizon = 4.0 * 3.14159265358979323846;  // pauli_x only
  double a = 0.0;
  double omega1 = 1.0;
  double periods = 6.0;  // horizon in drift periods 2 pi / omega1
  double guess_amplitude = -1.0;  // negative keeps the gate's own value

  GateSpec build() const;
};

/// Geometric gamma grid; points = 1 gives gamma_min alone.
struct NoiseConfig {
  NoiseKind kind = NoiseKind::None;
  double gamma_min = 1e-5;
  double gamma_max = 1e-2;
  int points = 12;

  std::vector<double> grid() const;
};

struct FieldConfig {
  double fwhm = 0.0;  // 0 means horizon / 2
  double perturbation = 0.0;
  std::uint64_t seed = 0;
  std::string checkpoint;  // guess field file; empty means analytic seed
};

struct StagedConfig {
  double cold_perturbation = 0.5;  // amplitude of the cold random seed (no analytic part)
  std::uint64_t cold_seed = 1;
};

struct ExperimentConfig {
  GateConfig gate;
  NoiseConfig noise;
  PropagatorConfig propagator;
  OptimizationConfig optimizer;
  OptimizationConfig reoptimizer;  // used under noise, starting from the reference field
  FieldConfig field;
  StagedConfig staged;
  double trajectory_gamma = 1e-2;
  std::string output_dir = ".";
  int workers = 1;

  ExperimentConfig();

  /// All keys in fixed order, values printed with %.17g.
  std::string canonical() const;
  /// FNV-1a 64 of canonical() without the run.* keys, as 16 hex digits.
  std::string hash() const;

  void validate() const;
};

/// Parses config text on top of the defaults. Throws ConfigError with the line number.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Applies one "key = value" assignment; throws ConfigError for unknown keys or bad values.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

std::uint64_t fnv1a64(const std::string& data);

}  // namespace liouctl
