#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>

#include <Eigen/Dense>

namespace liouctl {

using Eigen::Index;

template <typename Real>
using ComplexT = std::complex<Real>;

// N x N operator on the system Hilbert space (hbar = 1).
template <typename Real>
using HilbertOperatorT = Eigen::Matrix<ComplexT<Real>, Eigen::Dynamic, Eigen::Dynamic>;

// Coefficients of an operator in an orthonormal operator basis.
template <typename Scalar>
using LiouvilleVectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// N^2 x N^2 matrix acting on Liouville vectors.
template <typename Scalar>
using SuperoperatorT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Complex = std::complex<double>;
using HilbertOperator = HilbertOperatorT<double>;
using LiouvilleVector = LiouvilleVectorT<Complex>;
using Superoperator = SuperoperatorT<Complex>;
using RealVector = LiouvilleVectorT<double>;
using RealSuperoperator = SuperoperatorT<double>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PropagationError : public std::runtime_error {
 public:
  PropagationError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

inline void require_dims(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace liouctl
