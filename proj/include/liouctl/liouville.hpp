#pragma once

// Operator algebra on Liouville space: orthonormal operator bases, vectorization,
// and the commutator / double-commutator superoperators that make up the
// controlled GKLS generator with amplitude or phase controller noise.

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liouctl/types.hpp"

namespace liouctl {

template <typename Real>
HilbertOperatorT<Real> kron(const HilbertOperatorT<Real>& a, const HilbertOperatorT<Real>& b) {
  HilbertOperatorT<Real> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename Real>
bool is_hermitian(const HilbertOperatorT<Real>& op, Real tol = Real(1e-12)) {
  if (op.rows() != op.cols()) return false;
  const Real scale = std::max<Real>(Real(1), op.cwiseAbs().maxCoeff());
  return (op - op.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

namespace pauli {

template <typename Real = double>
HilbertOperatorT<Real> identity() {
  return HilbertOperatorT<Real>::Identity(2, 2);
}

template <typename Real = double>
HilbertOperatorT<Real> x() {
  HilbertOperatorT<Real> m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

template <typename Real = double>
HilbertOperatorT<Real> y() {
  using C = ComplexT<Real>;
  HilbertOperatorT<Real> m(2, 2);
  m << C(0), C(0, -1), C(0, 1), C(0);
  return m;
}

template <typename Real = double>
HilbertOperatorT<Real> z() {
  HilbertOperatorT<Real> m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// Spin-1/2 operators S_k = sigma_k / 2.
template <typename Real = double>
HilbertOperatorT<Real> sx() { return x<Real>() / Real(2); }
template <typename Real = double>
HilbertOperatorT<Real> sy() { return y<Real>() / Real(2); }
template <typename Real = double>
HilbertOperatorT<Real> sz() { return z<Real>() / Real(2); }

}  // namespace pauli

/// Ordered orthonormal basis {A_i} of the N x N operators, tr{A_i^dag A_j} = delta_ij.
///
/// The shipped bases put an element proportional to the identity first, so the
/// first Liouville coordinate carries the trace.
template <typename Real>
class OperatorBasisT {
 public:
  using Operator = HilbertOperatorT<Real>;

  explicit OperatorBasisT(std::vector<Operator> elements) : elements_(std::move(elements)) {
    require_dims(!elements_.empty(), "operator basis is empty");
    dim_ = elements_.front().rows();
    require_dims(dim_ >= 1 && static_cast<Index>(elements_.size()) == dim_ * dim_,
                 "operator basis must contain N^2 elements");
    hermitian_ = true;
    for (const auto& e : elements_) {
      require_dims(e.rows() == dim_ && e.cols() == dim_, "operator basis element has wrong shape");
      hermitian_ = hermitian_ && is_hermitian<Real>(e, Real(1e-14));
    }
  }

  /// Normalized Pauli products sigma_a (x) sigma_b (x) ... / sqrt(N), first qubit most significant.
  static OperatorBasisT pauli(int qubits) {
    require_dims(qubits >= 1, "pauli basis needs at least one qubit");
    const std::vector<Operator> single = {pauli::identity<Real>(), pauli::x<Real>(),
                                          pauli::y<Real>(), pauli::z<Real>()};
    std::vector<Operator> elements = single;
    for (int q = 1; q < qubits; ++q) {
      std::vector<Operator> next;
      next.reserve(elements.size() * 4);
      for (const auto& a : elements)
        for (const auto& b : single) next.push_back(kron<Real>(a, b));
      elements = std::move(next);
    }
    const Real norm = std::sqrt(static_cast<Real>(elements.front().rows()));
    for (auto& e : elements) e /= norm;
    return OperatorBasisT(std::move(elements));
  }

  /// Generalized Gell-Mann basis for any N >= 2, scaled to unit Hilbert-Schmidt norm.
  static OperatorBasisT gell_mann(Index n) {
    require_dims(n >= 2, "gell-mann basis needs N >= 2");
    using C = ComplexT<Real>;
    std::vector<Operator> elements;
    elements.push_back(Operator::Identity(n, n) / std::sqrt(static_cast<Real>(n)));
    const Real inv_sqrt2 = Real(1) / std::sqrt(Real(2));
    for (Index j = 0; j < n; ++j) {
      for (Index k = j + 1; k < n; ++k) {
        Operator sym = Operator::Zero(n, n);
        sym(j, k) = sym(k, j) = inv_sqrt2;
        elements.push_back(sym);
        Operator asym = Operator::Zero(n, n);
        asym(j, k) = C(0, -inv_sqrt2);
        asym(k, j) = C(0, inv_sqrt2);
        elements.push_back(asym);
      }
    }
    for (Index l = 1; l < n; ++l) {
      Operator d = Operator::Zero(n, n);
      const Real c = Real(1) / std::sqrt(static_cast<Real>(l * (l + 1)));
      for (Index m = 0; m < l; ++m) d(m, m) = c;
      d(l, l) = -static_cast<Real>(l) * c;
      elements.push_back(d);
    }
    return OperatorBasisT(std::move(elements));
  }

  /// Matrix units |i><j| in row-major order (rho_00, rho_01, rho_10, rho_11 for N = 2).
  static OperatorBasisT matrix_units(Index n) {
    require_dims(n >= 1, "matrix-unit basis needs N >= 1");
    std::vector<Operator> elements;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        Operator e = Operator::Zero(n, n);
        e(i, j) = 1;
        elements.push_back(e);
      }
    return OperatorBasisT(std::move(elements));
  }

  Index dim() const { return dim_; }
  Index size() const { return dim_ * dim_; }
  bool hermitian() const { return hermitian_; }
  const Operator& operator[](Index i) const { return elements_[static_cast<std::size_t>(i)]; }
  const std::vector<Operator>& elements() const { return elements_; }

 private:
  std::vector<Operator> elements_;
  Index dim_ = 0;
  bool hermitian_ = false;
};

using OperatorBasis = OperatorBasisT<double>;

enum class NoiseKind { None, Amplitude, Phase };

/// Controller noise: amplitude noise gives -rate * eps^2 [Hc,[Hc, .]],
/// phase noise gives -rate [H,[H, .]] with the full instantaneous Hamiltonian.
struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  double rate = 0.0;

  void validate() const {
    if (!(rate >= 0.0)) throw std::invalid_argument("noise rate must be non-negative");
  }
  bool active() const { return kind != NoiseKind::None && rate > 0.0; }
};

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// chi_i = tr{A_i^dag X}.
template <typename Real>
LiouvilleVectorT<ComplexT<Real>> vectorize(const HilbertOperatorT<Real>& op,
                                           const OperatorBasisT<Real>& basis) {
  require_dims(op.rows() == basis.dim() && op.cols() == basis.dim(),
               "vectorize: operator and basis dimensions differ");
  LiouvilleVectorT<ComplexT<Real>> v(basis.size());
  for (Index i = 0; i < basis.size(); ++i) v(i) = basis[i].conjugate().cwiseProduct(op).sum();
  return v;
}

/// Sum_i chi_i A_i.
template <typename Real, typename Derived>
HilbertOperatorT<Real> devectorize(const Eigen::MatrixBase<Derived>& v,
                                   const OperatorBasisT<Real>& basis) {
  require_dims(v.size() == basis.size(), "devectorize: vector length must be N^2");
  HilbertOperatorT<Real> op = HilbertOperatorT<Real>::Zero(basis.dim(), basis.dim());
  for (Index i = 0; i < basis.size(); ++i) op += ComplexT<Real>(v(i)) * basis[i];
  return op;
}

/// Matrix of a linear map on operators: column j is vec(f(A_j)).
template <typename Real, typename Map>
SuperoperatorT<ComplexT<Real>> superoperator_of(const OperatorBasisT<Real>& basis, Map&& f) {
  SuperoperatorT<ComplexT<Real>> s(basis.size(), basis.size());
  for (Index j = 0; j < basis.size(); ++j) s.col(j) = vectorize<Real>(f(basis[j]), basis);
  return s;
}

/// Superoperator of -i[H, .].
template <typename Real>
SuperoperatorT<ComplexT<Real>> commutator_superop(const HilbertOperatorT<Real>& h,
                                                  const OperatorBasisT<Real>& basis) {
  require_dims(h.rows() == basis.dim() && h.cols() == basis.dim(),
               "commutator_superop: dimension mismatch");
  if (!is_hermitian<Real>(h)) throw std::invalid_argument("commutator_superop: H is not Hermitian");
  const ComplexT<Real> minus_i(0, -1);
  return superoperator_of<Real>(basis, [&](const HilbertOperatorT<Real>& x) {
    return HilbertOperatorT<Real>(minus_i * (h * x - x * h));
  });
}

/// Superoperator of [A,[A, .]]; positive semidefinite and annihilates the identity.
template <typename Real>
SuperoperatorT<ComplexT<Real>> double_commutator_superop(const HilbertOperatorT<Real>& a,
                                                         const OperatorBasisT<Real>& basis) {
  require_dims(a.rows() == basis.dim() && a.cols() == basis.dim(),
               "double_commutator_superop: dimension mismatch");
  if (!is_hermitian<Real>(a))
    throw std::invalid_argument("double_commutator_superop: operator is not Hermitian");
  return superoperator_of<Real>(basis, [&](const HilbertOperatorT<Real>& x) {
    const HilbertOperatorT<Real> inner = a * x - x * a;
    return HilbertOperatorT<Real>(a * inner - inner * a);
  });
}

template <typename Real>
SuperoperatorT<ComplexT<Real>> dissipator_amplitude(const HilbertOperatorT<Real>& hc, Real rate,
                                                    Real field,
                                                    const OperatorBasisT<Real>& basis) {
  if (!(rate >= 0)) throw std::invalid_argument("dissipator_amplitude: negative noise rate");
  return -(rate * field * field) * double_commutator_superop<Real>(hc, basis);
}

template <typename Real>
SuperoperatorT<ComplexT<Real>> dissipator_phase(const HilbertOperatorT<Real>& h0,
                                                const HilbertOperatorT<Real>& hc, Real rate,
                                                Real field, const OperatorBasisT<Real>& basis) {
  if (!(rate >= 0)) throw std::invalid_argument("dissipator_phase: negative noise rate");
  return -rate * double_commutator_superop<Real>(HilbertOperatorT<Real>(h0 + field * hc), basis);
}

/// L = -i[H0 + sum_k eps_k H_k, .] + D, with D chosen by the noise model.
/// Amplitude noise acts independently on each control channel.
template <typename Real>
SuperoperatorT<ComplexT<Real>> build_generator(const HilbertOperatorT<Real>& h0,
                                               std::span<const HilbertOperatorT<Real>> controls,
                                               std::span<const Real> fields,
                                               const NoiseModel& noise,
                                               const OperatorBasisT<Real>& basis) {
  require_dims(controls.size() == fields.size(), "build_generator: one field value per control");
  require_dims(h0.rows() == basis.dim() && h0.cols() == basis.dim(),
               "build_generator: drift dimension mismatch");
  noise.validate();
  HilbertOperatorT<Real> h = h0;
  for (std::size_t k = 0; k < controls.size(); ++k) {
    require_dims(controls[k].rows() == basis.dim(), "build_generator: control dimension mismatch");
    h += fields[k] * controls[k];
  }
  SuperoperatorT<ComplexT<Real>> gen = commutator_superop<Real>(h, basis);
  const Real rate = static_cast<Real>(noise.rate);
  switch (noise.kind) {
    case NoiseKind::None:
      break;
    case NoiseKind::Amplitude:
      for (std::size_t k = 0; k < controls.size(); ++k)
        gen += dissipator_amplitude<Real>(controls[k], rate, fields[k], basis);
      break;
    case NoiseKind::Phase:
      gen += -rate * double_commutator_superop<Real>(h, basis);
      break;
  }
  return gen;
}

template <typename Real>
SuperoperatorT<ComplexT<Real>> build_generator(const HilbertOperatorT<Real>& h0,
                                               const HilbertOperatorT<Real>& hc, Real field,
                                               const NoiseModel& noise,
                                               const OperatorBasisT<Real>& basis) {
  return build_generator<Real>(h0, std::span<const HilbertOperatorT<Real>>(&hc, 1),
                               std::span<const Real>(&field, 1), noise, basis);
}

/// Real part of a superoperator expressed in a Hermitian basis, where it is exactly real.
template <typename Derived>
RealSuperoperator real_superop(const Eigen::MatrixBase<Derived>& s, double tol = 1e-10) {
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if (s.imag().cwiseAbs().maxCoeff() > tol * scale)
    throw std::invalid_argument("superoperator has a non-negligible imaginary part");
  return s.real();
}

}  // namespace liouctl
