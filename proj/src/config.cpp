#include "liouctl/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace liouctl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || trim(v.substr(pos)) != "" || !std::isfinite(out))
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || trim(v.substr(pos)) != "")
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw ConfigError("config key '" + key + "': out of range");
  return static_cast<int>(x);
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

struct Entry {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define LIOUCTL_REAL(KEY, FIELD)                                                                    \
  Entry {                                                                                            \
    KEY, [](ExperimentConfig& c, const std::string& v) { c.FIELD = to_double(KEY, v); },            \
        [](const ExperimentConfig& c) { return fmt(c.FIELD); }                                       \
  }
#define LIOUCTL_INT(KEY, FIELD)                                                                     \
  Entry {                                                                                            \
    KEY, [](ExperimentConfig& c, const std::string& v) { c.FIELD = to_int(KEY, v); },               \
        [](const ExperimentConfig& c) { return std::to_string(c.FIELD); }                           \
  }
#define LIOUCTL_TEXT(KEY, FIELD)                                                                    \
  Entry {                                                                                            \
    KEY, [](ExperimentConfig& c, const std::string& v) { c.FIELD = v; },                            \
        [](const ExperimentConfig& c) { return c.FIELD; }                                            \
  }
#define LIOUCTL_SEED(KEY, FIELD)                                                                    \
  Entry {                                                                                            \
    KEY,                                                                                             \
        [](ExperimentConfig& c, const std::string& v) {                                              \
          const long long x = to_integer(KEY, v);                                                    \
          if (x < 0) throw ConfigError(std::string("config key '") + KEY + "': must be >= 0");     \
          c.FIELD = static_cast<std::uint64_t>(x);                                                   \
        },                                                                                           \
        [](const ExperimentConfig& c) { return std::to_string(c.FIELD); }                           \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      LIOUCTL_TEXT("gate.name", gate.name),
      LIOUCTL_REAL("gate.u", gate.u),
      LIOUCTL_REAL("gate.a_x", gate.a_x),
      LIOUCTL_REAL("gate.a_y", gate.a_y),
      LIOUCTL_REAL("gate.phi", gate.phi),
      LIOUCTL_REAL("gate.cycles", gate.cycles),
      LIOUCTL_REAL("gate.horizon", gate.horizon),
      LIOUCTL_REAL("gate.a", gate.a),
      LIOUCTL_REAL("gate.omega1", gate.omega1),
      LIOUCTL_REAL("gate.periods", gate.periods),
      LIOUCTL_REAL("gate.guess_amplitude", gate.guess_amplitude),
      Entry{"noise.kind",
            [](ExperimentConfig& c, const std::string& v) {
              try {
                c.noise.kind = noise_kind_from_string(v);
              } catch (const std::exception&) {
                throw ConfigError("config key 'noise.kind': unknown noise kind '" + v + "'");
              }
            },
            [](const ExperimentConfig& c) { return to_string(c.noise.kind); }},
      LIOUCTL_REAL("noise.gamma_min", noise.gamma_min),
      LIOUCTL_REAL("noise.gamma_max", noise.gamma_max),
      LIOUCTL_INT("noise.points", noise.points),
      LIOUCTL_REAL("propagator.dt", propagator.dt),
      LIOUCTL_INT("propagator.m_points", propagator.m_points),
      LIOUCTL_INT("propagator.krylov_dim", propagator.krylov_dim),
      LIOUCTL_REAL("propagator.refine_tol", propagator.refine_tol),
      LIOUCTL_INT("propagator.max_refine", propagator.max_refine),
      LIOUCTL_REAL("optimizer.lambda", optimizer.lambda),
      Entry{"optimizer.channel_lambda",
            [](ExperimentConfig& c, const std::string& v) {
              c.optimizer.channel_lambda = to_list("optimizer.channel_lambda", v);
            },
            [](const ExperimentConfig& c) { return list_text(c.optimizer.channel_lambda); }},
      LIOUCTL_INT("optimizer.max_iters", optimizer.max_iters),
      LIOUCTL_REAL("optimizer.target_infidelity", optimizer.target_infidelity),
      LIOUCTL_INT("optimizer.stagnation_window", optimizer.stagnation_window),
      LIOUCTL_REAL("optimizer.stagnation_eps", optimizer.stagnation_eps),
      LIOUCTL_REAL("reopt.lambda", reoptimizer.lambda),
      Entry{"reopt.channel_lambda",
            [](ExperimentConfig& c, const std::string& v) {
              c.reoptimizer.channel_lambda = to_list("reopt.channel_lambda", v);
            },
            [](const ExperimentConfig& c) { return list_text(c.reoptimizer.channel_lambda); }},
      LIOUCTL_INT("reopt.max_iters", reoptimizer.max_iters),
      LIOUCTL_REAL("reopt.target_infidelity", reoptimizer.target_infidelity),
      LIOUCTL_INT("reopt.stagnation_window", reoptimizer.stagnation_window),
      LIOUCTL_REAL("reopt.stagnation_eps", reoptimizer.stagnation_eps),
      LIOUCTL_REAL("field.fwhm", field.fwhm),
      LIOUCTL_REAL("field.perturbation", field.perturbation),
      LIOUCTL_SEED("field.seed", field.seed),
      LIOUCTL_TEXT("field.checkpoint", field.checkpoint),
      LIOUCTL_REAL("staged.cold_perturbation", staged.cold_perturbation),
      LIOUCTL_SEED("staged.cold_seed", staged.cold_seed),
      LIOUCTL_REAL("trajectory.gamma", trajectory_gamma),
      LIOUCTL_TEXT("run.output_dir", output_dir),
      LIOUCTL_INT("run.workers", workers),
  };
  return table;
}

#undef LIOUCTL_REAL
#undef LIOUCTL_INT
#undef LIOUCTL_TEXT
#undef LIOUCTL_SEED

}  // namespace

GateSpec GateConfig::build() const {
  GateSpec spec;
  TwoQubitParams p;
  p.a = a;
  p.omega1 = omega1;
  p.a_x = a_x;
  p.a_y = a_y;
  p.periods = periods;
  if (name == "hadamard") {
    spec = hadamard_spec(u, a_x, phi, cycles);
  } else if (name == "pauli_x") {
    spec = pauli_x_embedded_spec(a_x, a_y, horizon);
  } else if (name == "entangling") {
    spec = two_qubit_spec(p);
  } else if (name == "staged_pauli_x") {
    spec = staged_pauli_x_spec(p);
  } else {
    throw ConfigError("unknown gate '" + name + "'");
  }
  if (guess_amplitude >= 0)
    for (auto& c : spec.controls) c.guess_amplitude = guess_amplitude;
  return spec;
}

std::vector<double> NoiseConfig::grid() const {
  std::vector<double> g;
  if (points == 1) return {gamma_min};
  for (int i = 0; i < points; ++i)
    g.push_back(gamma_min * std::pow(gamma_max / gamma_min, static_cast<double>(i) / (points - 1)));
  g.back() = gamma_max;
  return g;
}

ExperimentConfig::ExperimentConfig() {
  reoptimizer.target_infidelity = 0.0;
  reoptimizer.max_iters = 500;
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const auto& e : entries()) out += std::string(e.key) + " = " + e.get(*this) + "\n";
  return out;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string ExperimentConfig::hash() const {
  // run.* keys (output location, thread count) do not change results
  std::string text;
  for (const auto& e : entries())
    if (std::string(e.key).rfind("run.", 0) != 0) text += std::string(e.key) + " = " + e.get(*this) + "\n";
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

void ExperimentConfig::validate() const {
  auto wrap = [](const auto& f) {
    try {
      f();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  };
  wrap([&] { gate.build(); });
  if (!(noise.gamma_min > 0) || !(noise.gamma_max >= noise.gamma_min))
    throw ConfigError("noise grid needs 0 < gamma_min <= gamma_max");
  if (noise.points < 1) throw ConfigError("noise.points must be >= 1");
  if (!(propagator.dt > 0)) throw ConfigError("propagator.dt must be positive");
  wrap([&] {
    const GateSpec spec = gate.build();
    propagator.validate(spec.basis.size());
    optimizer.validate(static_cast<int>(spec.controls.size()));
    reoptimizer.validate(static_cast<int>(spec.controls.size()));
  });
  if (field.fwhm < 0) throw ConfigError("field.fwhm must be >= 0");
  if (!(trajectory_gamma >= 0)) throw ConfigError("trajectory.gamma must be >= 0");
  if (!(staged.cold_perturbation >= 0)) throw ConfigError("staged.cold_perturbation must be >= 0");
  if (workers < 1) throw ConfigError("run.workers must be >= 1");
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& e : entries()) {
    if (key == e.key) {
      e.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace liouctl
