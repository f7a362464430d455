#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "liouctl/krotov.hpp"

using namespace liouctl;

namespace {

RealSuperoperator random_real(Index n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  RealSuperoperator m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = g(rng);
  return m;
}

HilbertOperator random_hermitian(Index n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  HilbertOperator m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return (m + m.adjoint()) / 2.0;
}

double overlap(const RealSuperoperator& y, const RealSuperoperator& x, const RealSuperoperator& g) {
  return y.cwiseProduct(x * g).sum();
}

// Generators of a two-level system written out term by term.
RealSuperoperator amplitude_generator(const RealSuperoperator& h0, const RealSuperoperator& hc, double eps,
                                      double gamma) {
  return h0 + eps * hc + gamma * eps * eps * hc * hc;
}

RealSuperoperator phase_generator(const RealSuperoperator& h0, const RealSuperoperator& hc, double eps,
                                  double gamma) {
  const RealSuperoperator h = h0 + eps * hc;
  return h + gamma * h * h;
}

struct TwoLevel {
  OperatorBasis basis = OperatorBasis::pauli(1);
  RealSuperoperator h0, hc, anticomm;
  RealSuperoperator y, g;
};

TwoLevel random_two_level(unsigned seed) {
  std::mt19937 rng(seed);
  TwoLevel s;
  s.h0 = real_superop(commutator_superop<double>(random_hermitian(2, rng), s.basis));
  s.hc = real_superop(commutator_superop<double>(random_hermitian(2, rng), s.basis));
  s.anticomm = s.hc * s.h0 + s.h0 * s.hc;
  s.y = random_real(4, rng);
  s.g = random_real(4, rng);
  return s;
}

GateSpec identity_spec() {
  GateSpec g;
  g.name = "identity";
  g.basis = OperatorBasis::pauli(1);
  g.drift = HilbertOperator::Zero(2, 2);
  g.controls.push_back({"c", pauli::sx(), 0.0});
  g.target = Superoperator::Identity(4, 4);
  g.horizon = 1.0;
  return g;
}

bool non_decreasing(const OptimizationTrace& t, double tol) {
  for (std::size_t i = 1; i < t.history.size(); ++i)
    if (t.history[i].objective < t.history[i - 1].objective - tol) return false;
  return true;
}

}  // namespace

TEST(Objective, PerfectAndHadamardVsIdentity) {
  const auto h = hadamard_spec();
  const RealSuperoperator o = h.target.real();
  EXPECT_NEAR(objective(o, o), 1.0, 1e-15);
  // Identity map: Tr{O} / |O|^2 with both computed from the map entries.
  const double oracle = o.diagonal().sum() / o.squaredNorm();
  EXPECT_NEAR(objective(RealSuperoperator::Identity(4, 4), o), oracle, 1e-15);
  EXPECT_NEAR(oracle, 0.0, 1e-15);
  EXPECT_THROW(objective(o, RealSuperoperator::Zero(4, 4)), std::invalid_argument);
  EXPECT_THROW(objective(o, RealSuperoperator::Zero(3, 3)), DimensionError);
}

TEST(FieldEnergy, ShapeWeightedIntegral) {
  ControlField f(10.0, 20000, {"a", "b"}, 3.0);
  for (int j = 0; j < f.n_steps(); ++j) {
    f.values()(0, j) = std::sqrt(f.shape()(j));
    f.values()(1, j) = 2.0 * f.shape()(j);
  }
  const auto e = field_energy(f);
  EXPECT_NEAR(e[0], 10.0, 1e-12);
  // 4 * integral of the Gaussian over [0, T] via erf.
  const double k = std::sqrt(4.0 * std::log(2.0)) / 3.0;
  const double gauss = std::sqrt(3.14159265358979323846) / k * std::erf(5.0 * k);
  EXPECT_NEAR(e[1], 4.0 * gauss, 1e-7);
}

TEST(ControlField, GridAndValidation) {
  auto f = ControlField::for_step(1.0, 0.3, {"c"});
  EXPECT_EQ(f.n_steps(), 4);
  EXPECT_NEAR(f.dt(), 0.25, 1e-15);
  EXPECT_NEAR(f.fwhm(), 0.5, 1e-15);
  EXPECT_NEAR(f.grid().back(), 1.0, 0.0);
  EXPECT_NEAR(f.shape()(1), std::exp(-4.0 * std::log(2.0) * 0.125 * 0.125 / 0.25), 1e-15);
  EXPECT_THROW(ControlField(0.0, 4, {"c"}), std::invalid_argument);
  EXPECT_THROW(ControlField(1.0, 0, {"c"}), std::invalid_argument);
  EXPECT_THROW(ControlField(1.0, 4, {}), std::invalid_argument);
}

TEST(ControlField, SeedIsDeterministic) {
  const auto spec = hadamard_spec();
  auto a = seed_field(spec, 0.1, 0.0, 0.3, 7);
  auto b = seed_field(spec, 0.1, 0.0, 0.3, 7);
  auto c = seed_field(spec, 0.1, 0.0, 0.3, 8);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_GT((a.values() - c.values()).norm(), 0.0);
  auto plain = seed_field(spec, 0.1);
  EXPECT_NEAR(plain.values().maxCoeff(), 0.5 * plain.shape().maxCoeff(), 1e-15);
}

TEST(KrotovIncrement, IdentityCostateAndMapGiveZero) {
  const auto s = random_two_level(1);
  const RealSuperoperator id = RealSuperoperator::Identity(4, 4);
  EXPECT_NEAR(field_update_amplitude<double>(id, id, s.hc, 0.7, 1.0, 1.0, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(field_update_phase<double>(id, id, s.hc, s.anticomm, 0.7, 1.0, 1.0, 0.0), 0.0, 1e-15);
}

TEST(KrotovIncrement, NoiselessReducesToFirstOrder) {
  const auto s = random_two_level(2);
  const double expected = 0.8 * overlap(s.y, s.hc, s.g) / (2.0 * 1.5);
  EXPECT_NEAR(field_update_amplitude<double>(s.y, s.g, s.hc, 0.3, 0.8, 1.5, 0.0), expected, 1e-14);
  EXPECT_NEAR(field_update_phase<double>(s.y, s.g, s.hc, s.anticomm, 0.3, 0.8, 1.5, 0.0), expected, 1e-14);
}

// f(eps) = Re Tr{Y^T L(eps) G} is quadratic in eps, so centered differences give the
// first and second derivatives to round-off; the increment is s f' / (2 (lambda - f''/2)).
TEST(KrotovIncrement, MatchesFiniteDifferenceAmplitude) {
  for (unsigned seed : {3u, 4u, 5u}) {
    const auto s = random_two_level(seed);
    for (double gamma : {0.0, 1e-4, 0.05}) {
      const double eps = 0.4, h = 1e-3, lambda = 2.0, shape = 0.6;
      auto f = [&](double e) { return overlap(s.y, amplitude_generator(s.h0, s.hc, e, gamma), s.g); };
      const double d1 = (f(eps + h) - f(eps - h)) / (2 * h);
      const double d2 = (f(eps + h) - 2 * f(eps) + f(eps - h)) / (h * h);
      const double oracle = shape * d1 / (2.0 * (lambda - 0.5 * d2));
      const double inc = field_update_amplitude<double>(s.y, s.g, s.hc, eps, shape, lambda, gamma);
      EXPECT_NEAR(inc, oracle, 1e-6 * std::abs(oracle)) << "seed " << seed << " gamma " << gamma;
    }
  }
}

TEST(KrotovIncrement, MatchesFiniteDifferencePhase) {
  for (unsigned seed : {6u, 7u, 8u}) {
    const auto s = random_two_level(seed);
    for (double gamma : {0.0, 1e-4, 0.05}) {
      const double eps = -0.3, h = 1e-3, lambda = 2.0, shape = 0.9;
      auto f = [&](double e) { return overlap(s.y, phase_generator(s.h0, s.hc, e, gamma), s.g); };
      const double d1 = (f(eps + h) - f(eps - h)) / (2 * h);
      const double d2 = (f(eps + h) - 2 * f(eps) + f(eps - h)) / (h * h);
      const double oracle = shape * d1 / (2.0 * (lambda - 0.5 * d2));
      const double inc = field_update_phase<double>(s.y, s.g, s.hc, s.anticomm, eps, shape, lambda, gamma);
      EXPECT_NEAR(inc, oracle, 1e-6 * std::abs(oracle)) << "seed " << seed << " gamma " << gamma;
    }
  }
}

TEST(KrotovIncrement, PhaseWithoutDriftEqualsAmplitude) {
  const auto s = random_two_level(9);
  const RealSuperoperator zero = RealSuperoperator::Zero(4, 4);
  EXPECT_NEAR(field_update_phase<double>(s.y, s.g, s.hc, zero, 0.2, 1.0, 1.0, 0.01),
              field_update_amplitude<double>(s.y, s.g, s.hc, 0.2, 1.0, 1.0, 0.01), 1e-15);
}

TEST(KrotovIncrement, GuardFallsBackToLambda) {
  const auto s = random_two_level(10);
  const RealSuperoperator c = -s.hc * s.hc;
  const double q = overlap(s.y, c, s.g);
  ASSERT_NE(q, 0.0);
  // Pick gamma so that lambda + gamma q = 1e-4 lambda.
  const double gamma = (1e-4 - 1.0) / q;
  bool guarded = false;
  const double inc = krotov_increment<double>(s.y, s.g, s.hc, c, 1.0, 1.0, gamma, &guarded);
  EXPECT_TRUE(guarded);
  EXPECT_NEAR(inc, overlap(s.y, s.hc, s.g) / 2.0, 1e-14);
  EXPECT_THROW(krotov_increment<double>(s.y, s.g, s.hc, c, 1.0, 0.0, 0.0), std::invalid_argument);
}

TEST(ControlProblem, GeneratorMatchesDissipatorBuilders) {
  const auto spec = hadamard_spec();
  const double eps = 0.37;
  for (auto kind : {NoiseKind::Amplitude, NoiseKind::Phase}) {
    ControlProblem p(spec, NoiseModel{kind, 0.02});
    HilbertOperator hc = spec.controls[0].op;
    Superoperator d = kind == NoiseKind::Amplitude ? dissipator_amplitude<double>(hc, 0.02, eps, spec.basis)
                                                   : dissipator_phase<double>(spec.drift, hc, 0.02, eps, spec.basis);
    Superoperator l = commutator_superop<double>(HilbertOperator(spec.drift + eps * hc), spec.basis) + d;
    EXPECT_LT((p.generator(&eps) - l.real()).norm(), 1e-13);
  }
}

class DiscreteGradient : public ::testing::TestWithParam<NoiseKind> {};

TEST_P(DiscreteGradient, MatchesFiniteDifference) {
  const auto spec = hadamard_spec();
  ControlProblem p(spec, NoiseModel{GetParam(), GetParam() == NoiseKind::None ? 0.0 : 1e-3});
  auto field = seed_field(spec, 0.1, 0.0, 0.5, 11);
  const Eigen::MatrixXd grad = gradient(p, field);
  // Fourth-order centered stencil; a wider step keeps round-off in J well below 1e-6 relative.
  const double h = 1e-3;
  for (int j : {0, 17, 60, 113, field.n_steps() - 1}) {
    auto at = [&](double d) {
      auto f = field;
      f.values()(0, j) += d;
      return evaluate(p, f).objective;
    };
    const double fd = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
    EXPECT_NEAR(grad(0, j) * field.dt(), fd, 1e-6 * std::abs(fd) + 1e-12) << "interval " << j;
  }
}

INSTANTIATE_TEST_SUITE_P(Noise, DiscreteGradient,
                         ::testing::Values(NoiseKind::None, NoiseKind::Amplitude, NoiseKind::Phase));

TEST(Krotov, FirstIterationFollowsShapedGradient) {
  const auto spec = hadamard_spec();
  ControlProblem p(spec, NoiseModel{});
  auto field = seed_field(spec, 0.1, 0.0, 0.5, 12);
  const Eigen::MatrixXd grad = gradient(p, field);
  OptimizationConfig cfg;
  cfg.lambda = 100.0;
  cfg.max_iters = 1;
  cfg.target_infidelity = 0.0;
  const auto trace = krotov_optimize(p, field, cfg);
  Eigen::VectorXd step = (trace.field.values() - field.values()).row(0).transpose();
  Eigen::VectorXd expected = field.shape().cwiseProduct(grad.row(0).transpose());
  const double cosine = step.dot(expected) / (step.norm() * expected.norm());
  EXPECT_GT(cosine, 0.999);
}

TEST(Krotov, IdentityTargetConvergesImmediately) {
  ControlProblem p(identity_spec(), NoiseModel{});
  ControlField f(1.0, 10, {"c"});
  OptimizationConfig cfg;
  const auto t = krotov_optimize(p, f, cfg);
  EXPECT_EQ(t.reason, Termination::TargetReached);
  EXPECT_EQ(t.iterations(), 0);
  EXPECT_NEAR(t.final_infidelity, 0.0, 1e-15);
}

TEST(Krotov, ConfigValidation) {
  OptimizationConfig cfg;
  cfg.lambda = 0.0;
  EXPECT_THROW(cfg.validate(1), std::invalid_argument);
  cfg.lambda = 1.0;
  cfg.channel_lambda = {1.0, 2.0};
  EXPECT_THROW(cfg.validate(1), std::invalid_argument);
  EXPECT_NO_THROW(cfg.validate(2));
  EXPECT_EQ(cfg.lambda_for(1), 2.0);
  ControlProblem p(hadamard_spec(), NoiseModel{});
  ControlField wrong(1.0, 10, {"c"});
  EXPECT_THROW(krotov_optimize(p, wrong, OptimizationConfig{}), std::invalid_argument);
}

class HadamardRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    spec_ = new GateSpec(hadamard_spec());
    ControlProblem p(*spec_, NoiseModel{});
    trace_ = new OptimizationTrace(krotov_optimize(p, seed_field(*spec_, 0.1), OptimizationConfig{}));
  }
  static void TearDownTestSuite() {
    delete trace_;
    delete spec_;
  }
  static GateSpec* spec_;
  static OptimizationTrace* trace_;
};
GateSpec* HadamardRun::spec_ = nullptr;
OptimizationTrace* HadamardRun::trace_ = nullptr;

TEST_F(HadamardRun, ReachesTargetMonotonically) {
  EXPECT_TRUE(trace_->converged());
  EXPECT_LE(trace_->final_infidelity, 1e-4);
  EXPECT_TRUE(non_decreasing(*trace_, 1e-12));
  for (const auto& r : trace_->history) EXPECT_NEAR(r.objective + r.infidelity, 1.0, 1e-15);
}

TEST_F(HadamardRun, RestartIsFixedPoint) {
  ControlProblem p(*spec_, NoiseModel{});
  const auto again = krotov_optimize(p, trace_->field, OptimizationConfig{});
  EXPECT_EQ(again.iterations(), 0);
  EXPECT_LT(std::abs(again.final_infidelity - trace_->final_infidelity), 1e-12);
}

TEST_F(HadamardRun, ZeroRateMatchesNoiselessExactly) {
  ControlProblem p(*spec_, NoiseModel{NoiseKind::Phase, 0.0});
  const auto t = krotov_optimize(p, seed_field(*spec_, 0.1), OptimizationConfig{});
  EXPECT_EQ(t.field.values(), trace_->field.values());
  EXPECT_EQ(t.final_infidelity, trace_->final_infidelity);
}

TEST_F(HadamardRun, NoiseDegradesAndReoptimizationIsMonotone) {
  ControlProblem noisy(*spec_, NoiseModel{NoiseKind::Phase, 1e-3});
  const double if_n = evaluate(noisy, trace_->field).infidelity;
  EXPECT_GT(if_n, trace_->final_infidelity);
  OptimizationConfig cfg;
  cfg.max_iters = 40;
  cfg.target_infidelity = 0.0;
  const auto t = krotov_optimize(noisy, trace_->field, cfg);
  EXPECT_NEAR(t.history.front().infidelity, if_n, 1e-13);
  EXPECT_LE(t.final_infidelity, if_n + 1e-12);
  EXPECT_TRUE(non_decreasing(t, 1e-12));
}

TEST_F(HadamardRun, SemiGlobalEvaluationAgrees) {
  for (auto noise : {NoiseModel{}, NoiseModel{NoiseKind::Amplitude, 1e-2}}) {
    ControlProblem p(*spec_, noise);
    const auto dense = evaluate(p, trace_->field);
    const auto sg = evaluate_semiglobal(p, trace_->field, PropagatorConfig::two_level());
    EXPECT_LT((dense.maps.back() - sg.maps.back()).norm(), 1e-9);
    EXPECT_NEAR(dense.infidelity, sg.infidelity, 1e-10);
  }
}
