#pragma once

// Map-level Krotov optimization with noise-aware field updates.
//
// Fields are piecewise constant on the propagation grid, so each interval has an exact
// step map E_j = exp(dt L_j). The backward multiplier is Y_j = E_j^T Y_{j+1} with
// Y_N = O / Tr{O^T O}, and Re Tr{Y_j^T G_j} telescopes to the objective. Updating
// interval j only when it does not lower Re Tr{Y_{j+1}^T E_j G_j} makes every
// iteration monotone.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "liouctl/control_field.hpp"
#include "liouctl/gates.hpp"
#include "liouctl/krylov.hpp"
#include "liouctl/liouville.hpp"
#include "liouctl/semiglobal.hpp"

namespace liouctl {

/// Re Tr{O^dag G} / Tr{O^dag O}; 1 for a perfect gate.
template <typename DerivedG, typename DerivedO>
double objective(const Eigen::MatrixBase<DerivedG>& g, const Eigen::MatrixBase<DerivedO>& o) {
  require_dims(g.rows() == o.rows() && g.cols() == o.cols(), "objective: map and target sizes differ");
  const double norm = std::real(o.cwiseAbs2().sum());
  if (!(norm > 0)) throw std::invalid_argument("objective: zero-norm target");
  return std::real((o.conjugate().cwiseProduct(g)).sum()) / norm;
}

/// Penalty integral sum_j eps(j)^2 / s(j) dt per channel.
inline std::vector<double> field_energy(const ControlField& field) { return field.energy(); }

/// Single-time Krotov increment s * Re Tr{Y^dag X G} / (2 (lambda + gamma Re Tr{Y^dag C G})),
/// with X = dL/deps and C the double commutator of the channel. Falls back to the
/// lambda-only denominator when the noisy one drops below 1e-3 lambda.
template <typename Scalar>
double krotov_increment(const SuperoperatorT<Scalar>& y, const SuperoperatorT<Scalar>& g,
                        const SuperoperatorT<Scalar>& dl, const SuperoperatorT<Scalar>& c, double shape,
                        double lambda, double gamma, bool* guarded = nullptr) {
  if (!(lambda > 0)) throw std::invalid_argument("krotov_increment: lambda must be positive");
  const double grad = std::real((y.conjugate().cwiseProduct(dl * g)).sum());
  double denom = lambda;
  if (gamma != 0.0) denom += gamma * std::real((y.conjugate().cwiseProduct(c * g)).sum());
  const bool fallback = denom < 1e-3 * lambda;
  if (guarded) *guarded = fallback;
  if (fallback) denom = lambda;
  return shape * grad / (2.0 * denom);
}

/// Amplitude noise: dL/deps = Hc' + 2 gamma eps Hc'^2 with Hc' the superoperator of -i[Hc, .].
template <typename Scalar>
double field_update_amplitude(const SuperoperatorT<Scalar>& y, const SuperoperatorT<Scalar>& g,
                              const SuperoperatorT<Scalar>& hc_super, double eps, double shape, double lambda,
                              double gamma) {
  const SuperoperatorT<Scalar> sq = hc_super * hc_super;
  return krotov_increment<Scalar>(y, g, SuperoperatorT<Scalar>(hc_super + 2.0 * gamma * eps * sq),
                                  SuperoperatorT<Scalar>(-sq), shape, lambda, gamma);
}

/// Phase noise: dL/deps = Hc' + gamma ({Hc', H0'} + 2 eps Hc'^2).
template <typename Scalar>
double field_update_phase(const SuperoperatorT<Scalar>& y, const SuperoperatorT<Scalar>& g,
                          const SuperoperatorT<Scalar>& hc_super, const SuperoperatorT<Scalar>& anticomm,
                          double eps, double shape, double lambda, double gamma) {
  const SuperoperatorT<Scalar> sq = hc_super * hc_super;
  return krotov_increment<Scalar>(y, g, SuperoperatorT<Scalar>(hc_super + gamma * (anticomm + 2.0 * eps * sq)),
                                  SuperoperatorT<Scalar>(-sq), shape, lambda, gamma);
}

struct OptimizationConfig {
  double lambda = 1.0;
  std::vector<double> channel_lambda;  // overrides lambda per channel when non-empty
  int max_iters = 2000;
  double target_infidelity = 1e-4;
  int stagnation_window = 25;
  double stagnation_eps = 1e-10;

  void validate(int channels) const;
  double lambda_for(int channel) const;
};

enum class Termination { TargetReached, MaxIterations, Stagnation };
std::string to_string(Termination t);

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double infidelity = 0.0;
  std::vector<double> energy;
  int rejected_updates = 0;  // intervals left unchanged by the gain check
};

struct OptimizationTrace {
  std::vector<IterationRecord> history;
  ControlField field;
  Termination reason = Termination::MaxIterations;
  double final_infidelity = 1.0;
  int iterations() const { return history.empty() ? 0 : history.back().iteration; }
  bool converged() const { return reason == Termination::TargetReached; }
};

class MonotonicityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gate system and noise model in real arithmetic (the operator basis is Hermitian).
class ControlProblem {
 public:
  ControlProblem(const GateSpec& spec, const NoiseModel& noise);

  int n_channels() const { return static_cast<int>(controls_.size()); }
  Index liouville_dim() const { return drift_.rows(); }
  const NoiseModel& noise() const { return noise_; }
  const GateSpec& spec() const { return spec_; }
  const RealSuperoperator& target() const { return target_; }
  double target_norm() const { return target_norm_; }

  RealSuperoperator generator(const double* eps) const;
  /// dL/deps_k at the given field values.
  std::vector<RealSuperoperator> directions(const double* eps) const;
  /// -Hc_k'^2 = [Hc_k, [Hc_k, .]].
  const RealSuperoperator& curvature(int k) const { return curvature_[static_cast<std::size_t>(k)]; }
  const RealSuperoperator& control(int k) const { return controls_[static_cast<std::size_t>(k)]; }
  const RealSuperoperator& drift() const { return drift_; }

  double objective(const RealSuperoperator& g) const;

 private:
  GateSpec spec_;
  NoiseModel noise_;
  RealSuperoperator drift_;
  std::vector<RealSuperoperator> controls_;
  std::vector<RealSuperoperator> curvature_;
  RealSuperoperator target_;
  double target_norm_ = 1.0;
};

/// Step maps and maps at grid times for a given field.
struct Evaluation {
  double objective = 0.0;
  double infidelity = 1.0;
  std::vector<RealSuperoperator> maps;  // G(t_0) .. G(t_N)
};

Evaluation evaluate(const ControlProblem& problem, const ControlField& field);

/// Same field propagated with the semi-global/Krylov propagator at the given settings.
Evaluation evaluate_semiglobal(const ControlProblem& problem, const ControlField& field,
                               const PropagatorConfig& cfg);

/// dJ/deps_k(j) / dt for every channel and interval of the discretized functional.
Eigen::MatrixXd gradient(const ControlProblem& problem, const ControlField& field);

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Sequential Krotov iterations from field0. Throws MonotonicityError if the objective
/// drops by more than 1e-10 in an iteration.
OptimizationTrace krotov_optimize(const ControlProblem& problem, const ControlField& field0,
                                  const OptimizationConfig& cfg, const IterationCallback& on_iteration = {});

}  // namespace liouctl
