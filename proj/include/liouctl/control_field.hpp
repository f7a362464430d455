#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace liouctl {

struct GateSpec;

/// Piecewise-constant control channels on a uniform grid of n_steps intervals over [0, T].
///
/// values(k, j) is channel k on interval j; shape(j) is s(t) at the interval midpoint,
/// a Gaussian exp(-4 ln2 (t - T/2)^2 / fwhm^2).
class ControlField {
 public:
  ControlField() = default;
  ControlField(double horizon, int n_steps, std::vector<std::string> names, double fwhm = 0.0);

  /// Grid whose step is the largest value <= dt that divides the horizon.
  static ControlField for_step(double horizon, double dt, std::vector<std::string> names, double fwhm = 0.0);

  double horizon() const { return horizon_; }
  double dt() const { return horizon_ / n_steps_; }
  int n_steps() const { return n_steps_; }
  int n_channels() const { return static_cast<int>(names_.size()); }
  double fwhm() const { return fwhm_; }
  const std::vector<std::string>& names() const { return names_; }

  double midpoint(int j) const { return (j + 0.5) * dt(); }
  /// Grid boundary times t_0 .. t_n.
  std::vector<double> grid() const;

  Eigen::MatrixXd& values() { return values_; }
  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::VectorXd& shape() const { return shape_; }

  /// Channel value at time t (interval containing t, last interval at t = T).
  double at(int channel, double t) const;

  /// sum_j eps_k(j)^2 / s(j) * dt per channel, the penalty integral without lambda.
  std::vector<double> energy() const;

 private:
  double horizon_ = 0.0;
  int n_steps_ = 0;
  double fwhm_ = 0.0;
  std::vector<std::string> names_;
  Eigen::MatrixXd values_;
  Eigen::VectorXd shape_;
};

double gaussian_shape(double t, double horizon, double fwhm);

/// Analytic seed: each channel is its guess amplitude times the shape function, plus an
/// optional relative random perturbation drawn from a seeded generator.
ControlField seed_field(const GateSpec& spec, double dt, double fwhm = 0.0, double perturbation = 0.0,
                        std::uint64_t seed = 0);

}  // namespace liouctl
