#pragma once

// phi-functions and Arnoldi-based evaluation of phi_m(tA) v.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "liouctl/types.hpp"

namespace liouctl {

/// phi_0..phi_{m_max} at z, phi_m(z) = (e^z - sum_{j<m} z^j/j!) / z^m.
///
/// phi_m is summed as a Taylor series while |z| < m, where the upward recursion
/// phi_m = (phi_{m-1} - 1/(m-1)!) / z would lose digits, and by recursion otherwise.
template <typename Scalar>
std::vector<Scalar> phi_functions(Scalar z, int m_max) {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  if (m_max < 0) throw std::invalid_argument("phi_functions: m_max must be non-negative");
  std::vector<Scalar> phi(static_cast<std::size_t>(m_max) + 1);
  phi[0] = std::exp(z);
  Real inv_fact = 1;  // 1/(m-1)!
  for (int m = 1; m <= m_max; ++m) {
    if (m > 1) inv_fact /= static_cast<Real>(m - 1);
    const Real az = std::abs(z);
    if (az >= static_cast<Real>(m)) {
      phi[m] = (phi[m - 1] - Scalar(inv_fact)) / z;
      continue;
    }
    Scalar term = Scalar(inv_fact / static_cast<Real>(m));  // 1/m!
    Scalar sum = term;
    for (int k = 1; k < 200; ++k) {
      term *= z / static_cast<Real>(k + m);
      sum += term;
      if (std::abs(term) <= std::numeric_limits<Real>::epsilon() * std::abs(sum) * Real(0.1)) break;
    }
    phi[m] = sum;
  }
  return phi;
}

/// Arnoldi basis V_k and Hessenberg H_k of span{v, Av, ..., A^{k-1} v}.
///
/// A is only touched through a matvec callable. Full reorthogonalization (two
/// Gram-Schmidt passes). An invariant subspace found early ("lucky breakdown")
/// truncates the basis, and the projected functions are then exact.
template <typename Scalar>
class KrylovSubspace {
 public:
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using CMatrix = Eigen::Matrix<ComplexT<Real>, Eigen::Dynamic, Eigen::Dynamic>;
  using CVector = Eigen::Matrix<ComplexT<Real>, Eigen::Dynamic, 1>;

  template <typename MatVec>
  KrylovSubspace(MatVec&& apply, const Vector& v, int max_dim) {
    if (max_dim < 1) throw std::invalid_argument("krylov dimension must be >= 1");
    const Index n = v.size();
    beta_ = v.norm();
    const int kmax = static_cast<int>(std::min<Index>(max_dim, n));
    basis_.resize(n, kmax);
    hess_ = Matrix::Zero(kmax, kmax);
    if (beta_ == Real(0)) {
      dim_ = 0;
      breakdown_ = true;
      return;
    }
    basis_.col(0) = v / beta_;
    const Real scale_tol = Real(64) * std::numeric_limits<Real>::epsilon();
    dim_ = kmax;
    for (int j = 0; j < kmax; ++j) {
      Vector w = apply(Vector(basis_.col(j)));
      const Real wnorm0 = w.norm();
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const Scalar h = basis_.col(i).dot(w);
          hess_(i, j) += h;
          w -= h * basis_.col(i);
        }
      }
      if (j + 1 == kmax) break;
      const Real wnorm = w.norm();
      if (wnorm == Real(0) || wnorm <= scale_tol * wnorm0) {
        dim_ = j + 1;
        breakdown_ = true;
        break;
      }
      hess_(j + 1, j) = wnorm;
      basis_.col(j + 1) = w / wnorm;
    }
    if (dim_ == n) breakdown_ = true;  // the whole space is spanned
    hess_.conservativeResize(dim_, dim_);
    basis_.conservativeResize(n, dim_);
    prepare_functions();
  }

  int dim() const { return dim_; }
  bool breakdown() const { return breakdown_; }
  const Matrix& hessenberg() const { return hess_; }
  const Matrix& basis() const { return basis_; }

  /// phi_m(t A) v, projected on the subspace.
  Vector phi_action(int m, Real t) const {
    if (dim_ == 0) return Vector::Zero(basis_.rows());
    CVector y = small_phi(m, t);
    return basis_ * to_scalar(y) * beta_;
  }

  Vector exp_action(Real t) const { return phi_action(0, t); }

 private:
  // Spectral route when the eigenvector matrix is well conditioned, otherwise the
  // augmented-matrix exponential whose last column carries phi_m(tH) e1.
  void prepare_functions() {
    CMatrix h = hess_.template cast<ComplexT<Real>>();
    Eigen::ComplexEigenSolver<CMatrix> es(h);
    if (es.info() == Eigen::Success) {
      const CMatrix& v = es.eigenvectors();
      Eigen::PartialPivLU<CMatrix> lu(v);
      const Real cond = v.norm() * lu.inverse().norm();
      if (std::isfinite(cond) && cond < Real(1e6)) {
        eigvals_ = es.eigenvalues();
        eigvecs_ = v;
        coeffs_ = lu.solve(CVector::Unit(dim_, 0));
        spectral_ = true;
      }
    }
  }

  CVector small_phi(int m, Real t) const {
    if (spectral_) {
      CVector d(dim_);
      for (int i = 0; i < dim_; ++i)
        d(i) = phi_functions<ComplexT<Real>>(t * eigvals_(i), m)[static_cast<std::size_t>(m)] *
               coeffs_(i);
      return eigvecs_ * d;
    }
    const int size = dim_ + m;
    CMatrix aug = CMatrix::Zero(size, size);
    aug.topLeftCorner(dim_, dim_) = t * hess_.template cast<ComplexT<Real>>();
    if (m > 0) {
      aug(0, dim_) = 1;
      for (int i = 0; i + 1 < m; ++i) aug(dim_ + i, dim_ + i + 1) = 1;
    }
    const CMatrix e = aug.exp();
    return e.col(size - 1).head(dim_);
  }

  template <typename V>
  Vector to_scalar(const V& y) const {
    if constexpr (is_complex_v<Scalar>)
      return y;
    else
      return y.real();
  }

  Matrix basis_;
  Matrix hess_;
  Real beta_ = 0;
  int dim_ = 0;
  bool breakdown_ = false;
  bool spectral_ = false;
  CVector eigvals_;
  CMatrix eigvecs_;
  CVector coeffs_;
};

/// exp(L t) v through a K-dimensional Arnoldi subspace.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> expm_action_arnoldi(
    const Eigen::MatrixBase<Derived>& l,
    const Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>& v,
    typename Eigen::NumTraits<typename Derived::Scalar>::Real t, int k,
    bool* breakdown = nullptr) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  require_dims(l.rows() == l.cols() && l.cols() == v.size(),
               "expm_action_arnoldi: operator and vector sizes differ");
  KrylovSubspace<Scalar> kr([&](const Vector& x) { return Vector(l * x); }, v, k);
  if (breakdown) *breakdown = kr.breakdown();
  return kr.exp_action(t);
}

/// Step map E = exp(dt L) and its directional derivatives D_k = d/de exp(dt (L + e B_k)) at e = 0.
///
/// Both come out of one exponential of the block-triangular matrix
/// [[L, B_1, ..., B_c], [0, L, 0...], ..., [0, ..., L]] * dt, whose first block row is
/// [E, D_1, ..., D_c]. Liouville dimensions here are at most 16, where the dense
/// exponential is cheaper than a Krylov pass per column.
template <typename Scalar>
struct StepDerivatives {
  SuperoperatorT<Scalar> map;
  std::vector<SuperoperatorT<Scalar>> derivatives;
};

template <typename Scalar>
StepDerivatives<Scalar> frozen_step_propagator(const SuperoperatorT<Scalar>& l,
                                               const std::vector<SuperoperatorT<Scalar>>& directions,
                                               double dt) {
  const Index n = l.rows();
  StepDerivatives<Scalar> out;
  if (directions.empty()) {
    out.map = (l * dt).exp();
    return out;
  }
  // One [[L, B_k], [0, L]] dt block per direction: the top-right block of its exponential
  // is the exact derivative of exp(L dt) along B_k.
  SuperoperatorT<Scalar> aug = SuperoperatorT<Scalar>::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = l * dt;
  aug.bottomRightCorner(n, n) = l * dt;
  for (std::size_t k = 0; k < directions.size(); ++k) {
    require_dims(directions[k].rows() == n && directions[k].cols() == n,
                 "frozen_step_propagator: direction size mismatch");
    aug.topRightCorner(n, n) = directions[k] * dt;
    const SuperoperatorT<Scalar> e = aug.exp();
    if (k == 0) out.map = e.topLeftCorner(n, n);
    out.derivatives.push_back(e.topRightCorner(n, n));
  }
  return out;
}

}  // namespace liouctl
