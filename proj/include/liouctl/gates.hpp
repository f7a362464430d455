#pragma once

// Gate systems: drift, control operators, target map and horizon.

#include <string>
#include <vector>

#include "liouctl/liouville.hpp"

namespace liouctl {

struct ControlChannel {
  std::string name;
  HilbertOperator op;
  double guess_amplitude = 0.0;  // peak of the analytic seed field
};

struct GateSpec {
  std::string name;
  HilbertOperator drift;
  std::vector<ControlChannel> controls;
  Superoperator target;
  double horizon = 0.0;
  OperatorBasis basis = OperatorBasis::pauli(1);

  Index dim() const { return drift.rows(); }
};

/// Matrix of rho -> U rho U^dag. Real and orthogonal in a Hermitian basis.
Superoperator unitary_to_superop(const HilbertOperator& u, const OperatorBasis& basis);

/// Matrix of rho -> W rho W^dag for any W (used for the partial Pauli-X target).
Superoperator conjugation_superop(const HilbertOperator& w, const OperatorBasis& basis);

/// (sigma_x - sigma_z)/sqrt(2): fixes I and sends S_x -> -S_z, S_y -> -S_y, S_z -> -S_x.
HilbertOperator hadamard_unitary();

/// Two-qubit gate diag-block(I, [[0, i], [-i, 0]]).
HilbertOperator entangling_unitary();

/// 0 (+) sigma_x: X on the second qubit inside the first-qubit |1> block, zero elsewhere.
HilbertOperator partial_pauli_x();

/// Projector on the first-qubit |1> block (the "(I - S_Z)" factor of the controls).
HilbertOperator qubit_block_projector();

/// Projector on the first-qubit |0> block, empty at t = 0 in the staged runs.
HilbertOperator ancilla_projector();

/// Drift u S_Z + a_x S_X, control cos(phi) S_X + sin(phi) S_Y, horizon cycles * 4 pi / Omega.
GateSpec hadamard_spec(double u = 1.0, double a_x = 1.0, double phi = 0.0, double cycles = 2.0);

/// Trivial drift, channels x and y driving a_i P1 (x) S_i, partial Pauli-X target.
GateSpec pauli_x_embedded_spec(double a_x = 1.0, double a_y = 1.0, double horizon = 4.0 * 3.14159265358979323846);

struct TwoQubitParams {
  double a = 0.0;
  double omega1 = 1.0;
  double a_x = 1.0;
  double a_y = 1.0;
  double periods = 6.0;  // horizon in units of 2 pi / omega1
};

/// Drift a I + omega1 S_Z^1, channels zx = a_x P1 (x) S_X, zy = a_y P1 (x) S_Y and
/// e = S_X^1 (x) S_Z^2, entangling target.
GateSpec two_qubit_spec(const TwoQubitParams& p = {});

/// Two-qubit Hamiltonian with the partial Pauli-X target (first stage of the ancilla strategy).
GateSpec staged_pauli_x_spec(const TwoQubitParams& p = {});

/// Dimension of the real Lie algebra generated by the traceless parts of i*ops.
int lie_closure_rank(const std::vector<HilbertOperator>& ops, double tol = 1e-9);

}  // namespace liouctl
