#include <random>

#include <gtest/gtest.h>

#include "liouctl/liouville.hpp"
#include "liouctl/semiglobal.hpp"

using namespace liouctl;

namespace {

HilbertOperator random_operator(Index n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  HilbertOperator m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

HilbertOperator random_hermitian(Index n, std::mt19937& rng) {
  HilbertOperator m = random_operator(n, rng);
  return (m + m.adjoint()) / 2.0;
}

// Random GKLS generator: Hamiltonian part plus two jump operators. Hermitian jumps keep
// the generator unital, so the traceless subspace is invariant and K = N^2 - 1 is exact.
Superoperator random_gkls(const OperatorBasis& basis, std::mt19937& rng, bool unital = true) {
  const Index n = basis.dim();
  const HilbertOperator h = random_hermitian(n, rng);
  std::vector<HilbertOperator> jumps;
  for (int k = 0; k < 2; ++k)
    jumps.push_back(0.4 * (unital ? random_hermitian(n, rng) : random_operator(n, rng)));
  return superoperator_of<double>(basis, [&](const HilbertOperator& x) {
    HilbertOperator out = Complex(0, -1) * (h * x - x * h);
    for (const auto& j : jumps) {
      const HilbertOperator jj = j.adjoint() * j;
      out += j * x * j.adjoint() - 0.5 * (jj * x + x * jj);
    }
    return out;
  });
}

Superoperator dense_exp(const Superoperator& l, double t) {
  Eigen::ComplexEigenSolver<Superoperator> es(l);
  const Superoperator& v = es.eigenvectors();
  Superoperator d = (es.eigenvalues() * t).array().exp().matrix().asDiagonal();
  return v * d * v.inverse();
}

double rel_error(const Superoperator& a, const Superoperator& b) { return (a - b).norm() / b.norm(); }

// Two-level system under a smooth drive, in the normalized Pauli basis.
GeneratorFn<Complex> driven_two_level(const NoiseModel& noise) {
  const auto basis = OperatorBasis::pauli(1);
  const HilbertOperator h0 = pauli::sz() + 0.3 * pauli::sx();
  const HilbertOperator hc = pauli::sx();
  return [=](double t) {
    const double eps = 0.8 * std::cos(1.1 * t) + 0.3 * std::sin(0.37 * t);
    return build_generator<double>(h0, hc, eps, noise, basis);
  };
}

GeneratorFn<Complex> driven_two_qubit() {
  const auto basis = OperatorBasis::pauli(2);
  const HilbertOperator h0 = kron<double>(pauli::sz(), pauli::identity()) +
                             0.7 * kron<double>(pauli::identity(), pauli::sz());
  const HilbertOperator hc = kron<double>(pauli::sx(), pauli::sz()) + kron<double>(pauli::identity(), pauli::sx());
  return [=](double t) {
    return build_generator<double>(h0, hc, std::sin(0.9 * t), NoiseModel{NoiseKind::Phase, 0.01}, basis);
  };
}

}  // namespace

TEST(ChebyshevNodes, Endpoints) {
  EXPECT_EQ(chebyshev_nodes(0.0, 1.0, 2), (std::vector<double>{0.0, 1.0}));
  const auto three = chebyshev_nodes(0.0, 1.0, 3);
  ASSERT_EQ(three.size(), 3u);
  EXPECT_NEAR(three[1], 0.5, 1e-16);
  EXPECT_THROW(chebyshev_nodes(0.0, 1.0, 1), std::invalid_argument);
}

TEST(ChebyshevNodes, ClosedForm) {
  const auto nodes = chebyshev_nodes(2.0, 0.1, 7);
  const double pi = std::acos(-1.0);
  for (int k = 0; k < 7; ++k) {
    const double x = -std::cos(pi * k / 6.0);  // ascending Lobatto point in [-1, 1]
    EXPECT_NEAR(nodes[k], 2.0 + 0.1 * (x + 1.0) / 2.0, 1e-15);
  }
}

TEST(PhiFunctions, ZeroGivesInverseFactorials) {
  const auto phi = phi_functions<double>(0.0, 8);
  double fact = 1;
  for (int m = 0; m <= 8; ++m) {
    if (m > 0) fact *= m;
    EXPECT_NEAR(phi[m], 1.0 / fact, 1e-16);
  }
}

TEST(PhiFunctions, AtOne) {
  const auto phi = phi_functions<double>(1.0, 3);
  EXPECT_NEAR(phi[1], std::exp(1.0) - 1.0, 1e-14);
  EXPECT_NEAR(phi[2], std::exp(1.0) - 2.0, 1e-14);
}

TEST(PhiFunctions, RecursionRegionMatchesLongDoubleSeries) {
  const Complex z(-5.0, 3.0);
  const auto phi = phi_functions<Complex>(z, 10);
  const std::complex<long double> zl(-5.0L, 3.0L);
  for (int m = 0; m <= 10; ++m) {
    std::complex<long double> term = 1.0L, sum = 0.0L;
    for (int k = 1; k <= m; ++k) term /= static_cast<long double>(k);
    for (int k = 0; k < 120; ++k) {
      sum += term;
      term *= zl / static_cast<long double>(k + m + 1);
    }
    const Complex oracle(static_cast<double>(sum.real()), static_cast<double>(sum.imag()));
    EXPECT_LT(std::abs(phi[m] - oracle), 1e-12 * std::max(1.0, std::abs(oracle))) << "m=" << m;
  }
}

TEST(ExpmActionArnoldi, ZeroOperator) {
  const LiouvilleVector v = LiouvilleVector::Ones(4);
  bool brk = false;
  const LiouvilleVector out = expm_action_arnoldi(Superoperator::Zero(4, 4), v, 1.0, 3, &brk);
  EXPECT_LT((out - v).norm(), 1e-15);
  EXPECT_TRUE(brk);
}

TEST(ExpmActionArnoldi, DiagonalOperator) {
  Superoperator l = Superoperator::Zero(4, 4);
  l.diagonal() << 0.0, Complex(0, -1), Complex(0, 1), -0.1;
  LiouvilleVector v(4);
  v << 1.0, Complex(0.5, 0.2), -0.3, 2.0;
  const LiouvilleVector out = expm_action_arnoldi(l, v, 1.0, 4);
  for (int i = 0; i < 4; ++i) EXPECT_LT(std::abs(out(i) - std::exp(l(i, i)) * v(i)), 1e-13);
}

TEST(ExpmActionArnoldi, TwoLevelLiouvillianWithThreeVectors) {
  HilbertOperator h = pauli::x();
  h(1, 1) += 1.0;
  const Superoperator l = commutator_superop<double>(h, OperatorBasis::matrix_units(2));
  LiouvilleVector v(4);
  v << 0.6, Complex(0.1, 0.3), Complex(0.1, -0.3), 0.4;
  const LiouvilleVector out = expm_action_arnoldi(l, v, 0.1, 3);
  EXPECT_LT((out - dense_exp(l, 0.1) * v).norm(), 1e-8);
}

TEST(ExpmActionArnoldi, RealScalar) {
  std::mt19937 rng(1);
  const RealSuperoperator l = real_superop(random_gkls(OperatorBasis::pauli(1), rng));
  const RealVector v = RealVector::Unit(4, 2);
  const RealVector out = expm_action_arnoldi(l, v, 0.3, 3);
  const LiouvilleVector oracle = dense_exp(l.cast<Complex>(), 0.3) * v.cast<Complex>();
  EXPECT_LT((out.cast<Complex>() - oracle).norm(), 1e-13);
}

TEST(PropagatorConfig, Validation) {
  PropagatorConfig cfg;
  EXPECT_NO_THROW(cfg.validate(4));
  cfg.krylov_dim = 4;
  EXPECT_THROW(cfg.validate(4), std::invalid_argument);
  cfg = PropagatorConfig{};
  cfg.m_points = 13;
  EXPECT_THROW(cfg.validate(4), std::invalid_argument);
  cfg = PropagatorConfig{};
  cfg.refine_tol = 0;
  EXPECT_THROW(cfg.validate(4), std::invalid_argument);
  EXPECT_NO_THROW(PropagatorConfig::su4().validate(16));
}

TEST(SemiglobalStep, TimeIndependentMatchesKrylovExponential) {
  std::mt19937 rng(9);
  const Superoperator l = random_gkls(OperatorBasis::pauli(1), rng);
  GeneratorFn<Complex> gen = [&](double) { return l; };
  PropagatorConfig cfg;
  const LiouvilleVector v = LiouvilleVector::Unit(4, 3);
  StepReport<Complex> rep;
  const Superoperator out = semiglobal_step<Complex>(gen, Superoperator(v), 0.0, cfg, nullptr, nullptr, &rep);
  EXPECT_TRUE(rep.frozen);
  EXPECT_LT((LiouvilleVector(out.col(0)) - expm_action_arnoldi(l, v, cfg.dt, cfg.krylov_dim)).norm(), 1e-14);
}

TEST(SemiglobalStep, RefinementResidualDecreases) {
  auto gen = driven_two_level(NoiseModel{NoiseKind::Phase, 0.05});
  PropagatorConfig cfg;
  StepReport<Complex> rep;
  semiglobal_step<Complex>(gen, Superoperator::Identity(4, 4), 0.3, cfg, nullptr, nullptr, &rep);
  ASSERT_GE(rep.residuals.size(), 2u);
  for (std::size_t i = 1; i < rep.residuals.size(); ++i) EXPECT_LE(rep.residuals[i], rep.residuals[i - 1]);
  EXPECT_LT(rep.residuals.back(), cfg.refine_tol);
}

TEST(SemiglobalStep, NonConvergenceIsReported) {
  auto gen = driven_two_level(NoiseModel{});
  PropagatorConfig cfg;
  cfg.dt = 0.5;
  cfg.max_refine = 1;
  try {
    semiglobal_step<Complex>(gen, Superoperator::Identity(4, 4), 0.0, cfg);
    FAIL() << "expected PropagationError";
  } catch (const PropagationError& e) {
    EXPECT_GT(e.residual(), cfg.refine_tol);
  }
}

TEST(PropagateMap, ZeroGenerator) {
  GeneratorFn<Complex> gen = [](double) { return Superoperator::Zero(4, 4); };
  const auto res = propagate_map<Complex>(gen, 0.0, 1.0, PropagatorConfig{});
  ASSERT_EQ(res.maps.size(), 11u);
  for (const auto& g : res.maps) EXPECT_LT((g - Superoperator::Identity(4, 4)).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(res.times.back(), 1.0);
}

TEST(PropagateMap, TimeIndependentMatchesDenseExponential) {
  std::mt19937 rng(17);
  for (const auto& basis : {OperatorBasis::pauli(1), OperatorBasis::pauli(2)}) {
    const Superoperator l = random_gkls(basis, rng);
    GeneratorFn<Complex> gen = [&](double) { return l; };
    PropagatorConfig cfg;
    cfg.krylov_dim = static_cast<int>(basis.size()) - 1;
    const auto res = propagate_map<Complex>(gen, 0.0, 1.3, cfg);
    EXPECT_LT(rel_error(res.maps.back(), dense_exp(l, 1.3)), 1e-10);
  }
}

TEST(PropagateMap, UnitaryGeneratorGivesOrthogonalMap) {
  const auto basis = OperatorBasis::pauli(1);
  const RealSuperoperator l = real_superop(commutator_superop<double>(pauli::sz() + pauli::sx(), basis));
  GeneratorFn<double> gen = [&](double) { return l; };
  const auto res = propagate_map<double>(gen, 0.0, 5.0, PropagatorConfig{});
  const RealSuperoperator& g = res.maps.back();
  EXPECT_LT((g.transpose() * g - RealSuperoperator::Identity(4, 4)).norm(), 1e-10);
}

TEST(PropagateMap, AmplitudeNoiseContracts) {
  auto gen = driven_two_level(NoiseModel{NoiseKind::Amplitude, 0.2});
  const auto res = propagate_map<Complex>(gen, 0.0, 4.0, PropagatorConfig{});
  Eigen::JacobiSVD<Superoperator> svd(res.maps.back());
  EXPECT_LE(svd.singularValues().maxCoeff(), 1.0 + 1e-10);
  EXPECT_LT(svd.singularValues().minCoeff(), 1.0 - 1e-3);
}

TEST(PropagateMap, DrivenTwoLevelReachesQuotedAccuracy) {
  auto gen = driven_two_level(NoiseModel{});
  PropagatorConfig cfg;
  PropagatorConfig ref = cfg;
  ref.dt = cfg.dt / 4;
  ref.m_points = cfg.m_points + 4;
  const auto a = propagate_map<Complex>(gen, 0.0, 10.0, cfg);
  const auto b = propagate_map<Complex>(gen, 0.0, 10.0, ref);
  EXPECT_LT(rel_error(a.maps.back(), b.maps.back()), 1e-8);
}

TEST(PropagateMap, SelfConvergenceWhenHalvingStep) {
  auto gen = driven_two_qubit();
  PropagatorConfig coarse = PropagatorConfig::su4();
  coarse.m_points = 7;
  coarse.dt = 0.8;
  coarse.max_refine = 60;
  PropagatorConfig fine = coarse;
  fine.dt = coarse.dt / 2;
  PropagatorConfig ref = coarse;
  ref.dt = coarse.dt / 8;
  ref.m_points = coarse.m_points + 2;
  ref.krylov_dim = coarse.krylov_dim + 2;
  const double horizon = 8.0;
  const auto r = propagate_map<Complex>(gen, 0.0, horizon, ref).maps.back();
  const double e1 = rel_error(propagate_map<Complex>(gen, 0.0, horizon, coarse).maps.back(), r);
  const double e2 = rel_error(propagate_map<Complex>(gen, 0.0, horizon, fine).maps.back(), r);
  EXPECT_GT(e1 / e2, 10.0) << "e1=" << e1 << " e2=" << e2;
}

TEST(PropagateMap, TraceAndPurityOverSixRabiCycles) {
  const auto basis = OperatorBasis::pauli(1);
  const double omega = std::sqrt(1.0 + 0.09);
  const double horizon = 6 * 4 * std::acos(-1.0) / omega;
  HilbertOperator rho0 = HilbertOperator::Zero(2, 2);
  rho0(0, 0) = 1.0;
  const LiouvilleVector v0 = vectorize<double>(rho0, basis);
  for (auto kind : {NoiseKind::Amplitude, NoiseKind::Phase}) {
    auto gen = driven_two_level(NoiseModel{kind, 0.01});
    const auto res = propagate_map<Complex>(gen, 0.0, horizon, PropagatorConfig{});
    for (const auto& g : res.maps) {
      const HilbertOperator rho = devectorize<double>(LiouvilleVector(g * v0), basis);
      EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
      EXPECT_LE((rho * rho).trace().real(), 1.0 + 1e-10);
    }
  }
}

TEST(PropagateAdjoint, ZeroGenerator) {
  GeneratorFn<Complex> gen = [](double) { return Superoperator::Zero(4, 4); };
  std::mt19937 rng(3);
  const Superoperator y = random_operator(4, rng);
  const auto res = propagate_adjoint<Complex>(gen, 2.0, 0.0, y, PropagatorConfig{});
  for (const auto& m : res.maps) EXPECT_LT((m - y).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(res.times.front(), 0.0);
}

TEST(PropagateAdjoint, OverlapIsTimeInvariant) {
  const auto basis = OperatorBasis::pauli(1);
  HilbertOperator u(2, 2);
  u << 1, -1, -1, -1;  // Hadamard-type reflection (sx - sz)/sqrt2
  u /= std::sqrt(2.0);
  const Superoperator target = superoperator_of<double>(basis, [&](const HilbertOperator& x) {
    return HilbertOperator(u * x * u.adjoint());
  });
  for (double gamma : {0.0, 0.02}) {
    auto gen = driven_two_level(NoiseModel{NoiseKind::Phase, gamma});
    const double horizon = 4.0;
    const auto g = propagate_map<Complex>(gen, 0.0, horizon, PropagatorConfig{});
    const auto y = propagate_adjoint<Complex>(gen, horizon, 0.0, target, PropagatorConfig{});
    ASSERT_EQ(g.maps.size(), y.maps.size());
    const Complex ref = (y.maps.back().adjoint() * g.maps.back()).trace();
    for (std::size_t j = 0; j < g.maps.size(); ++j) {
      EXPECT_NEAR(std::abs((y.maps[j].adjoint() * g.maps[j]).trace() - ref), 0.0, 1e-9);
      EXPECT_NEAR(y.times[j], g.times[j], 1e-12);
    }
  }
}

TEST(FrozenStep, DerivativeMatchesFiniteDifference) {
  std::mt19937 rng(44);
  const auto basis = OperatorBasis::pauli(1);
  const RealSuperoperator l = real_superop(random_gkls(basis, rng));
  const RealSuperoperator b = real_superop(commutator_superop<double>(random_hermitian(2, rng), basis));
  const auto step = frozen_step_propagator<double>(l, {b}, 0.1);
  EXPECT_LT((step.map - RealSuperoperator((l * 0.1).exp())).norm(), 1e-14);
  const double h = 1e-5;
  const RealSuperoperator plus = ((l + h * b) * 0.1).exp();
  const RealSuperoperator minus = ((l - h * b) * 0.1).exp();
  EXPECT_LT((step.derivatives[0] - (plus - minus) / (2 * h)).norm(), 1e-9);
}
