#include "liouctl/gates.hpp"

#include <cmath>

namespace liouctl {

namespace {

constexpr double kPi = 3.14159265358979323846;

HilbertOperator id2() { return pauli::identity(); }

HilbertOperator projector_one() {
  HilbertOperator p = HilbertOperator::Zero(2, 2);
  p(1, 1) = 1.0;
  return p;
}

HilbertOperator projector_zero() {
  HilbertOperator p = HilbertOperator::Zero(2, 2);
  p(0, 0) = 1.0;
  return p;
}

bool is_unitary(const HilbertOperator& u, double tol = 1e-12) {
  return u.rows() == u.cols() &&
         (u.adjoint() * u - HilbertOperator::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

Superoperator conjugation_superop(const HilbertOperator& w, const OperatorBasis& basis) {
  require_dims(w.rows() == basis.dim() && w.cols() == basis.dim(), "conjugation_superop: dimension mismatch");
  return superoperator_of<double>(basis, [&](const HilbertOperator& x) {
    return HilbertOperator(w * x * w.adjoint());
  });
}

Superoperator unitary_to_superop(const HilbertOperator& u, const OperatorBasis& basis) {
  if (!is_unitary(u)) throw std::invalid_argument("unitary_to_superop: operator is not unitary");
  return conjugation_superop(u, basis);
}

HilbertOperator hadamard_unitary() { return (pauli::x() - pauli::z()) / std::sqrt(2.0); }

HilbertOperator entangling_unitary() {
  return HilbertOperator(kron<double>(projector_zero(), id2()) - kron<double>(projector_one(), pauli::y()));
}

HilbertOperator partial_pauli_x() { return kron<double>(projector_one(), pauli::x()); }

HilbertOperator qubit_block_projector() { return kron<double>(projector_one(), id2()); }

HilbertOperator ancilla_projector() { return kron<double>(projector_zero(), id2()); }

GateSpec hadamard_spec(double u, double a_x, double phi, double cycles) {
  if (u == 0.0 && a_x == 0.0) throw std::invalid_argument("hadamard_spec: drift vanishes");
  if (!(cycles > 0)) throw std::invalid_argument("hadamard_spec: cycles must be positive");
  GateSpec g;
  g.name = "hadamard";
  g.basis = OperatorBasis::pauli(1);
  g.drift = u * pauli::sz() + a_x * pauli::sx();
  g.controls.push_back({"c", HilbertOperator(std::cos(phi) * pauli::sx() + std::sin(phi) * pauli::sy()), 0.5});
  const double omega = std::hypot(u, a_x);
  g.horizon = cycles * 4.0 * kPi / omega;
  g.target = unitary_to_superop(hadamard_unitary(), g.basis);
  return g;
}

GateSpec pauli_x_embedded_spec(double a_x, double a_y, double horizon) {
  if (a_x == 0.0 && a_y == 0.0) throw std::invalid_argument("pauli_x_embedded_spec: control vanishes");
  GateSpec g;
  g.name = "pauli_x";
  g.basis = OperatorBasis::pauli(2);
  g.drift = HilbertOperator::Identity(4, 4);
  if (a_x != 0.0) g.controls.push_back({"x", kron<double>(projector_one(), HilbertOperator(a_x * pauli::sx())), 0.5});
  if (a_y != 0.0) g.controls.push_back({"y", kron<double>(projector_one(), HilbertOperator(a_y * pauli::sy())), 0.5});
  g.horizon = horizon;
  g.target = conjugation_superop(partial_pauli_x(), g.basis);
  return g;
}

namespace {

GateSpec two_qubit_hamiltonian(const TwoQubitParams& p) {
  if (p.omega1 == 0.0) throw std::invalid_argument("two_qubit_spec: omega1 must be non-zero");
  if (!(p.periods > 0)) throw std::invalid_argument("two_qubit_spec: periods must be positive");
  GateSpec g;
  g.basis = OperatorBasis::pauli(2);
  g.drift = p.a * HilbertOperator::Identity(4, 4) + p.omega1 * kron<double>(pauli::sz(), id2());
  // The X and Y parts of the Z channel are driven independently; a single field on
  // a_x S_X + a_y S_Y only generates a 7-dimensional subalgebra of su(4).
  if (p.a_x != 0.0) g.controls.push_back({"zx", kron<double>(projector_one(), HilbertOperator(p.a_x * pauli::sx())), 0.5});
  if (p.a_y != 0.0) g.controls.push_back({"zy", kron<double>(projector_one(), HilbertOperator(p.a_y * pauli::sy())), 0.5});
  g.controls.push_back({"e", kron<double>(pauli::sx(), pauli::sz()), 0.5});
  g.horizon = p.periods * 2.0 * kPi / std::abs(p.omega1);
  return g;
}

}  // namespace

GateSpec two_qubit_spec(const TwoQubitParams& p) {
  GateSpec g = two_qubit_hamiltonian(p);
  g.name = "entangling";
  g.target = unitary_to_superop(entangling_unitary(), g.basis);
  return g;
}

GateSpec staged_pauli_x_spec(const TwoQubitParams& p) {
  GateSpec g = two_qubit_hamiltonian(p);
  g.name = "staged_pauli_x";
  g.target = conjugation_superop(partial_pauli_x(), g.basis);
  return g;
}

int lie_closure_rank(const std::vector<HilbertOperator>& ops, double tol) {
  require_dims(!ops.empty(), "lie_closure_rank: no operators");
  const Index n = ops.front().rows();
  // Real coordinates of anti-Hermitian matrices, orthonormalized as they are found.
  std::vector<HilbertOperator> algebra;
  std::vector<Eigen::VectorXd> coords;
  auto add = [&](HilbertOperator m) {
    m -= (m.trace() / static_cast<double>(n)) * HilbertOperator::Identity(n, n);
    Eigen::VectorXd v(2 * n * n);
    for (Index i = 0; i < n * n; ++i) {
      v(2 * i) = m.data()[i].real();
      v(2 * i + 1) = m.data()[i].imag();
    }
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& c : coords) v -= c.dot(v) * c;
    const double norm = v.norm();
    if (norm <= tol) return false;
    v /= norm;
    coords.push_back(v);
    HilbertOperator q(n, n);
    for (Index i = 0; i < n * n; ++i) q.data()[i] = Complex(v(2 * i), v(2 * i + 1));
    algebra.push_back(q);
    return true;
  };
  for (const auto& op : ops) add(Complex(0, 1) * op);
  for (std::size_t i = 0; i < algebra.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) add(HilbertOperator(algebra[i] * algebra[j] - algebra[j] * algebra[i]));
  return static_cast<int>(algebra.size());
}

}  // namespace liouctl
