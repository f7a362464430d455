#pragma once

// Fidelity metrics, purity diagnostics, trajectories and the timekeeping comparison.

#include <string>
#include <vector>

#include "liouctl/liouville.hpp"

namespace liouctl {

/// 1 - Re Tr{O^T G} / Tr{O^T O}.
double infidelity(const RealSuperoperator& g, const RealSuperoperator& o);

/// Infidelity floored at 1e-16 for log-scale output.
double clipped_infidelity(double value);

/// R = IF_n / IF_U. Throws std::invalid_argument when IF_U <= 0.
double degradation_ratio(double if_n, double if_u);

/// NC = IF_n / IF_F. Throws std::invalid_argument when IF_F <= 0.
double noise_cancellation(double if_n, double if_f);

double purity(const HilbertOperator& rho);

/// d/dt tr{rho^2} = 2 v^T D v for v the coordinates of rho in the (Hermitian) basis.
double purity_loss_rate(const HilbertOperator& rho, const RealSuperoperator& dissipator, const OperatorBasis& basis);

/// Density matrix after applying a map given in the basis.
HilbertOperator apply_map(const RealSuperoperator& map, const HilbertOperator& rho, const OperatorBasis& basis);

struct BlochPoint {
  double t = 0.0;
  double x = 0.0, y = 0.0, z = 0.0;
  double radius = 0.0;
};

/// Pauli expectations of the evolved initial operator at each map. Two-level systems only.
std::vector<BlochPoint> bloch_trajectory(const std::vector<RealSuperoperator>& maps, const std::vector<double>& times,
                                         const HilbertOperator& initial, const OperatorBasis& basis);

struct AncillaSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> population;  // [state][time]
  double max = 0.0;
};

/// tr{P rho(t)} for every initial state. Throws std::invalid_argument unless P is a Hermitian projector.
AncillaSeries ancilla_population(const std::vector<RealSuperoperator>& maps, const std::vector<double>& times,
                                 const HilbertOperator& projector, const std::vector<HilbertOperator>& initial_states,
                                 const OperatorBasis& basis);

/// Pure states spanning the block of a projector: its basis states plus the two equal superpositions of the
/// first pair.
std::vector<HilbertOperator> block_states(const HilbertOperator& projector);

/// F = (2 + exp(-theta^2 / (2 N))) / 3.
double timekeeping_fidelity(double theta, double n_ticks);

/// Average gate fidelity of a qubit map from its normalized overlap with a unitary target.
double average_gate_fidelity(double overlap, Index hilbert_dim);

struct TimekeepingFit {
  double theta = 0.0;
  double residual_norm = 0.0;  // Euclidean norm of F_numeric - F_analytic
  double curve_range = 0.0;    // max - min of F_numeric
  double relative_residual() const { return curve_range > 0 ? residual_norm / curve_range : residual_norm; }
};

/// Least-squares pulse area for F(gamma) = timekeeping_fidelity(theta, 1/gamma).
TimekeepingFit fit_timekeeping(const std::vector<double>& gammas, const std::vector<double>& fidelity);

struct SweepRow {
  double gamma = 0.0;
  double if_u = 0.0;
  double if_n = 0.0;
  double if_f = 0.0;
  double energy_n = 0.0;  // total field energy of the reference field
  double energy_f = 0.0;  // and of the re-optimized one
  int iterations = 0;
  std::string reason;
};

struct SweepResult {
  std::string gate;
  std::string noise;
  std::vector<SweepRow> rows;

  double max_log10_nc() const;
  /// True when IF_F <= IF_n + tol on every row.
  bool mitigation_never_hurts(double tol = 1e-12) const;
  /// True when IF_n is non-decreasing along the rows (which are sorted by gamma).
  bool monotone_degradation() const;
};

}  // namespace liouctl
