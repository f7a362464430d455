#include "liouctl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace liouctl {

double infidelity(const RealSuperoperator& g, const RealSuperoperator& o) {
  require_dims(g.rows() == o.rows() && g.cols() == o.cols(), "infidelity: map and target sizes differ");
  const double norm = o.squaredNorm();
  if (!(norm > 0)) throw std::invalid_argument("infidelity: zero-norm target");
  return 1.0 - o.cwiseProduct(g).sum() / norm;
}

double clipped_infidelity(double value) { return std::max(value, 1e-16); }

double degradation_ratio(double if_n, double if_u) {
  if (!(if_u > 0)) throw std::invalid_argument("degradation_ratio: IF_U must be positive");
  return if_n / if_u;
}

double noise_cancellation(double if_n, double if_f) {
  if (!(if_f > 0)) throw std::invalid_argument("noise_cancellation: IF_F must be positive");
  return if_n / if_f;
}

double purity(const HilbertOperator& rho) { return std::real((rho * rho).trace()); }

double purity_loss_rate(const HilbertOperator& rho, const RealSuperoperator& dissipator, const OperatorBasis& basis) {
  require_dims(dissipator.rows() == basis.size() && dissipator.cols() == basis.size(),
               "purity_loss_rate: dissipator and basis sizes differ");
  if (!basis.hermitian()) throw std::invalid_argument("purity_loss_rate: basis must be Hermitian");
  const Eigen::VectorXd v = vectorize<double>(rho, basis).real();
  return 2.0 * v.dot(dissipator * v);
}

HilbertOperator apply_map(const RealSuperoperator& map, const HilbertOperator& rho, const OperatorBasis& basis) {
  require_dims(map.rows() == basis.size() && map.cols() == basis.size(), "apply_map: map and basis sizes differ");
  const Eigen::VectorXcd v = map.cast<Complex>() * vectorize<double>(rho, basis);
  return devectorize<double>(v, basis);
}

std::vector<BlochPoint> bloch_trajectory(const std::vector<RealSuperoperator>& maps, const std::vector<double>& times,
                                         const HilbertOperator& initial, const OperatorBasis& basis) {
  require_dims(basis.dim() == 2, "bloch_trajectory: two-level systems only");
  require_dims(maps.size() == times.size(), "bloch_trajectory: one time per map");
  std::vector<BlochPoint> out;
  out.reserve(maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const HilbertOperator rho = apply_map(maps[i], initial, basis);
    BlochPoint p;
    p.t = times[i];
    p.x = std::real((pauli::x() * rho).trace());
    p.y = std::real((pauli::y() * rho).trace());
    p.z = std::real((pauli::z() * rho).trace());
    p.radius = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    out.push_back(p);
  }
  return out;
}

AncillaSeries ancilla_population(const std::vector<RealSuperoperator>& maps, const std::vector<double>& times,
                                 const HilbertOperator& projector, const std::vector<HilbertOperator>& initial_states,
                                 const OperatorBasis& basis) {
  require_dims(maps.size() == times.size(), "ancilla_population: one time per map");
  require_dims(projector.rows() == basis.dim() && projector.cols() == basis.dim(),
               "ancilla_population: projector dimension mismatch");
  const double scale = std::max(1.0, projector.norm());
  if ((projector * projector - projector).norm() > 1e-12 * scale || !is_hermitian<double>(projector))
    throw std::invalid_argument("ancilla_population: operator is not an orthogonal projector");
  AncillaSeries s;
  s.times = times;
  for (const auto& rho0 : initial_states) {
    std::vector<double> pop;
    pop.reserve(maps.size());
    for (const auto& m : maps) {
      const double p = std::real((projector * apply_map(m, rho0, basis)).trace());
      pop.push_back(p);
      s.max = std::max(s.max, p);
    }
    s.population.push_back(std::move(pop));
  }
  return s;
}

std::vector<HilbertOperator> block_states(const HilbertOperator& projector) {
  std::vector<Index> idx;
  for (Index i = 0; i < projector.rows(); ++i)
    if (std::abs(projector(i, i) - 1.0) < 1e-12) idx.push_back(i);
  require_dims(!idx.empty(), "block_states: empty projector");
  const Index n = projector.rows();
  std::vector<HilbertOperator> out;
  auto pure = [n](const Eigen::VectorXcd& psi) { return HilbertOperator(psi * psi.adjoint()); };
  for (Index i : idx) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
    psi(i) = 1.0;
    out.push_back(pure(psi));
  }
  if (idx.size() >= 2) {
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(n);
    plus(idx[0]) = r;
    plus(idx[1]) = r;
    out.push_back(pure(plus));
    Eigen::VectorXcd plus_i = Eigen::VectorXcd::Zero(n);
    plus_i(idx[0]) = r;
    plus_i(idx[1]) = Complex(0, r);
    out.push_back(pure(plus_i));
  }
  return out;
}

double timekeeping_fidelity(double theta, double n_ticks) {
  if (!(n_ticks > 0)) throw std::invalid_argument("timekeeping_fidelity: N must be positive");
  return (2.0 + std::exp(-theta * theta / (2.0 * n_ticks))) / 3.0;
}

double average_gate_fidelity(double overlap, Index hilbert_dim) {
  const double d = static_cast<double>(hilbert_dim);
  return (d * overlap + 1.0) / (d + 1.0);
}

TimekeepingFit fit_timekeeping(const std::vector<double>& gammas, const std::vector<double>& fidelity) {
  if (gammas.size() != fidelity.size() || gammas.size() < 2)
    throw std::invalid_argument("fit_timekeeping: need at least two (gamma, F) pairs");
  for (double g : gammas)
    if (!(g > 0)) throw std::invalid_argument("fit_timekeeping: rates must be positive");
  // Single parameter a = theta^2, searched in log space: coarse scan, then golden section.
  auto cost = [&](double log_a) {
    const double a = std::exp(log_a);
    double s = 0.0;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      const double r = fidelity[i] - (2.0 + std::exp(-0.5 * a * gammas[i])) / 3.0;
      s += r * r;
    }
    return s;
  };
  const double lo = std::log(1e-6), hi = std::log(1e12);
  const int scan = 400;
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= scan; ++i) {
    const double c = cost(lo + (hi - lo) * i / scan);
    if (c < best_cost) {
      best_cost = c;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / scan;
  double b = lo + (hi - lo) * std::min(best + 1, scan) / scan;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
  double f1 = cost(x1), f2 = cost(x2);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = cost(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = cost(x2);
    }
  }
  TimekeepingFit fit;
  const double log_a = 0.5 * (a + b);
  fit.theta = std::exp(0.5 * log_a);
  fit.residual_norm = std::sqrt(cost(log_a));
  const auto [mn, mx] = std::minmax_element(fidelity.begin(), fidelity.end());
  fit.curve_range = *mx - *mn;
  return fit;
}

double SweepResult::max_log10_nc() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows)
    if (r.gamma > 0) best = std::max(best, std::log10(noise_cancellation(r.if_n, clipped_infidelity(r.if_f))));
  return best;
}

bool SweepResult::mitigation_never_hurts(double tol) const {
  return std::all_of(rows.begin(), rows.end(), [tol](const SweepRow& r) { return r.if_f <= r.if_n + tol; });
}

bool SweepResult::monotone_degradation() const {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].if_n < rows[i - 1].if_n) return false;
  return true;
}

}  // namespace liouctl
