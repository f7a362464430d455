#include "liouctl/control_field.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "liouctl/gates.hpp"
#include "liouctl/semiglobal.hpp"

namespace liouctl {

double gaussian_shape(double t, double horizon, double fwhm) {
  const double x = t - 0.5 * horizon;
  return std::exp(-4.0 * std::log(2.0) * x * x / (fwhm * fwhm));
}

ControlField::ControlField(double horizon, int n_steps, std::vector<std::string> names, double fwhm)
    : horizon_(horizon), n_steps_(n_steps), fwhm_(fwhm > 0 ? fwhm : 0.5 * horizon), names_(std::move(names)) {
  if (!(horizon > 0)) throw std::invalid_argument("control field horizon must be positive");
  if (n_steps < 1) throw std::invalid_argument("control field needs at least one interval");
  if (names_.empty()) throw std::invalid_argument("control field needs at least one channel");
  values_ = Eigen::MatrixXd::Zero(n_channels(), n_steps_);
  shape_.resize(n_steps_);
  for (int j = 0; j < n_steps_; ++j) shape_(j) = gaussian_shape(midpoint(j), horizon_, fwhm_);
}

ControlField ControlField::for_step(double horizon, double dt, std::vector<std::string> names, double fwhm) {
  return ControlField(horizon, step_count(0.0, horizon, dt), std::move(names), fwhm);
}

std::vector<double> ControlField::grid() const {
  std::vector<double> g(static_cast<std::size_t>(n_steps_) + 1);
  for (int j = 0; j <= n_steps_; ++j) g[static_cast<std::size_t>(j)] = j * dt();
  g.back() = horizon_;
  return g;
}

double ControlField::at(int channel, double t) const {
  int j = static_cast<int>(std::floor(t / dt()));
  j = std::clamp(j, 0, n_steps_ - 1);
  return values_(channel, j);
}

std::vector<double> ControlField::energy() const {
  std::vector<double> e(static_cast<std::size_t>(n_channels()), 0.0);
  for (int k = 0; k < n_channels(); ++k)
    e[static_cast<std::size_t>(k)] = (values_.row(k).array().square() / shape_.transpose().array()).sum() * dt();
  return e;
}

ControlField seed_field(const GateSpec& spec, double dt, double fwhm, double perturbation, std::uint64_t seed) {
  std::vector<std::string> names;
  for (const auto& c : spec.controls) names.push_back(c.name);
  ControlField f = ControlField::for_step(spec.horizon, dt, names, fwhm);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < f.n_channels(); ++k) {
    const double amp = spec.controls[static_cast<std::size_t>(k)].guess_amplitude;
    for (int j = 0; j < f.n_steps(); ++j) {
      double v = amp * f.shape()(j);
      if (perturbation != 0.0) v += perturbation * u(rng) * f.shape()(j);
      f.values()(k, j) = v;
    }
  }
  return f;
}

}  // namespace liouctl
