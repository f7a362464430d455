#pragma once

// Semi-global propagation of dv/dt = L(t) v.
//
// Each step [t, t+dt] is written in the scaled time w = (tau - t)/dt as
//   dv/dw = A v + s(w),  A = dt * L(t + dt/2),  s(w) = dt * (L(tau) - L(t + dt/2)) v(w).
// The source is interpolated at M Chebyshev-Lobatto nodes and rewritten as a
// polynomial sum_n sigma_n w^n / n!, for which the exact solution is
//   v(w) = sum_{j<M} w^j/j! v_j + w^M phi_M(w A) v_M,   v_{j+1} = A v_j + sigma_j.
// The node values feed back into the source until the end point stops changing.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "liouctl/krylov.hpp"
#include "liouctl/types.hpp"

namespace liouctl {

struct PropagatorConfig {
  double dt = 0.1;
  int m_points = 7;
  int krylov_dim = 3;
  double refine_tol = 1e-12;
  int max_refine = 20;

  static PropagatorConfig two_level() { return {}; }
  static PropagatorConfig su4() {
    PropagatorConfig c;
    c.m_points = 9;
    c.krylov_dim = 9;
    return c;
  }

  /// Checks the invariants against a Liouville dimension n = N^2.
  void validate(Index liouville_dim) const {
    if (!(dt > 0)) throw std::invalid_argument("propagator dt must be positive");
    if (m_points < 2 || m_points > 12)
      throw std::invalid_argument("propagator m_points must lie in [2, 12]");
    if (krylov_dim < 1) throw std::invalid_argument("propagator krylov_dim must be >= 1");
    if (krylov_dim > liouville_dim - 1)
      throw std::invalid_argument("propagator krylov_dim exceeds Liouville dimension - 1");
    if (!(refine_tol > 0)) throw std::invalid_argument("propagator refine_tol must be positive");
    if (max_refine < 1) throw std::invalid_argument("propagator max_refine must be >= 1");
  }
};

/// M Chebyshev-Lobatto points on [t, t+dt] in increasing order, endpoints included.
inline std::vector<double> chebyshev_nodes(double t, double dt, int m) {
  if (m < 2) throw std::invalid_argument("chebyshev_nodes: need at least two points");
  if (!(dt > 0)) throw std::invalid_argument("chebyshev_nodes: dt must be positive");
  std::vector<double> nodes(static_cast<std::size_t>(m));
  const double pi = std::acos(-1.0);
  for (int k = 0; k < m; ++k)
    nodes[static_cast<std::size_t>(k)] = t + dt * 0.5 * (1.0 - std::cos(pi * k / (m - 1)));
  nodes.front() = t;
  nodes.back() = t + dt;
  return nodes;
}

/// Maps samples f(w_k) at the scaled Lobatto nodes to monomial coefficients a_n of
/// sum_n a_n w^n, going through the Chebyshev interpolant in x = 2w - 1.
inline Eigen::MatrixXd lobatto_to_monomial(int m) {
  const std::vector<double> w = chebyshev_nodes(0.0, 1.0, m);
  Eigen::MatrixXd cheb(m, m);  // T_k(x_j)
  for (int j = 0; j < m; ++j) {
    const double x = 2.0 * w[static_cast<std::size_t>(j)] - 1.0;
    cheb(j, 0) = 1.0;
    if (m > 1) cheb(j, 1) = x;
    for (int k = 2; k < m; ++k) cheb(j, k) = 2.0 * x * cheb(j, k - 1) - cheb(j, k - 2);
  }
  // Coefficients of T_k(2w - 1) in powers of w.
  Eigen::MatrixXd mono = Eigen::MatrixXd::Zero(m, m);
  mono(0, 0) = 1.0;
  if (m > 1) {
    mono(0, 1) = -1.0;
    mono(1, 1) = 2.0;
  }
  for (int k = 2; k < m; ++k) {
    for (int n = 0; n < m; ++n) {
      double v = -2.0 * mono(n, k - 1) - mono(n, k - 2);
      if (n > 0) v += 4.0 * mono(n - 1, k - 1);
      mono(n, k) = v;
    }
  }
  return mono * cheb.partialPivLu().inverse();
}

template <typename Scalar>
using GeneratorFn = std::function<SuperoperatorT<Scalar>(double)>;

/// Per-step storage: nodes, generator samples, sources and Taylor-like coefficients.
template <typename Scalar>
struct StepWorkspace {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  std::vector<double> nodes;
  std::vector<SuperoperatorT<Scalar>> samples;
  SuperoperatorT<Scalar> midpoint;
  std::vector<Matrix> sources;
  std::vector<Matrix> taylor;  // v_0 .. v_M of the polynomial solution
  bool frozen = false;

  void sample(const GeneratorFn<Scalar>& gen, double t, double dt, int m) {
    nodes = chebyshev_nodes(t, dt, m);
    samples.clear();
    for (double tau : nodes) samples.push_back(gen(tau));
    midpoint = gen(t + 0.5 * dt);
    frozen = true;
    for (const auto& s : samples) {
      require_dims(s.rows() == midpoint.rows() && s.cols() == midpoint.cols(),
                   "generator changed size within a step");
      if (frozen && s != midpoint) frozen = false;
    }
  }
};

template <typename Scalar>
struct StepReport {
  int sweeps = 0;
  std::vector<double> residuals;  // relative end-point change per sweep
  bool frozen = false;
};

/// Values at the scaled nodes shifted by one step (w in [1, 2]); used as the next step's guess.
template <typename Scalar>
using StepGuess = std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>;

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> evaluate_polynomial_solution(
    const StepWorkspace<Scalar>& ws, double w, int m,
    const std::vector<KrylovSubspace<Scalar>>& tails) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix out = ws.taylor[0];
  double coef = 1.0;
  for (int j = 1; j < m; ++j) {
    coef *= w / j;
    out += coef * ws.taylor[static_cast<std::size_t>(j)];
  }
  const double wm = std::pow(w, m);
  for (Index c = 0; c < out.cols(); ++c)
    out.col(c) += wm * tails[static_cast<std::size_t>(c)].phi_action(m, w);
  return out;
}

}  // namespace detail

/// Advances the block of column vectors v from t to t + cfg.dt.
///
/// guess, if given, holds the solution at this step's nodes (e.g. extrapolated from
/// the previous step). next_guess receives the extrapolation to the following step.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> semiglobal_step(
    const GeneratorFn<Scalar>& gen, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v,
    double t, const PropagatorConfig& cfg, const StepGuess<Scalar>* guess = nullptr,
    StepGuess<Scalar>* next_guess = nullptr, StepReport<Scalar>* report = nullptr,
    StepWorkspace<Scalar>* workspace = nullptr) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int m = cfg.m_points;
  const double dt = cfg.dt;
  StepWorkspace<Scalar> local;
  StepWorkspace<Scalar>& ws = workspace ? *workspace : local;
  if (!workspace || ws.nodes.empty() || ws.nodes.front() != t) ws.sample(gen, t, dt, m);
  require_dims(ws.midpoint.cols() == v.rows(), "semiglobal_step: generator and state sizes differ");
  const SuperoperatorT<Scalar> a = ws.midpoint * dt;
  auto apply_a = [&a](const Vector& x) { return Vector(a * x); };
  const std::vector<double> w_nodes = chebyshev_nodes(0.0, 1.0, m);

  StepReport<Scalar> rep;
  if (ws.frozen) {
    rep.frozen = true;
    Matrix out(v.rows(), v.cols());
    StepGuess<Scalar> extrap(static_cast<std::size_t>(m), Matrix(v.rows(), v.cols()));
    for (Index c = 0; c < v.cols(); ++c) {
      KrylovSubspace<Scalar> kr(apply_a, Vector(v.col(c)), cfg.krylov_dim);
      out.col(c) = kr.exp_action(1.0);
      if (next_guess)
        for (int j = 0; j < m; ++j)
          extrap[static_cast<std::size_t>(j)].col(c) = kr.exp_action(1.0 + w_nodes[static_cast<std::size_t>(j)]);
    }
    if (next_guess) *next_guess = std::move(extrap);
    if (report) *report = rep;
    return out;
  }

  static thread_local std::vector<std::pair<int, Eigen::MatrixXd>> conversion_cache;
  const Eigen::MatrixXd* conv = nullptr;
  for (const auto& [size, mat] : conversion_cache)
    if (size == m) conv = &mat;
  if (!conv) {
    conversion_cache.emplace_back(m, lobatto_to_monomial(m));
    conv = &conversion_cache.back().second;
  }

  // Node values: the supplied guess or the frozen-generator solution.
  std::vector<Matrix> values(static_cast<std::size_t>(m));
  if (guess && static_cast<int>(guess->size()) == m && (*guess)[0].rows() == v.rows() &&
      (*guess)[0].cols() == v.cols()) {
    values = *guess;
    values[0] = v;
  } else {
    for (int j = 0; j < m; ++j) values[static_cast<std::size_t>(j)].resize(v.rows(), v.cols());
    for (Index c = 0; c < v.cols(); ++c) {
      KrylovSubspace<Scalar> kr(apply_a, Vector(v.col(c)), cfg.krylov_dim);
      for (int j = 0; j < m; ++j)
        values[static_cast<std::size_t>(j)].col(c) = kr.exp_action(w_nodes[static_cast<std::size_t>(j)]);
    }
  }

  Matrix end = values.back();
  std::vector<KrylovSubspace<Scalar>> tails;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  ws.sources.assign(static_cast<std::size_t>(m), Matrix());
  ws.taylor.assign(static_cast<std::size_t>(m) + 1, Matrix());
  for (int sweep = 0; sweep < cfg.max_refine; ++sweep) {
    for (int j = 0; j < m; ++j)
      ws.sources[static_cast<std::size_t>(j)] =
          dt * ((ws.samples[static_cast<std::size_t>(j)] - ws.midpoint) * values[static_cast<std::size_t>(j)]);
    ws.taylor[0] = v;
    double fact = 1.0;  // n!
    for (int n = 0; n < m; ++n) {
      if (n > 0) fact *= n;
      Matrix sigma = Matrix::Zero(v.rows(), v.cols());
      for (int j = 0; j < m; ++j) sigma += ((*conv)(n, j) * fact) * ws.sources[static_cast<std::size_t>(j)];
      ws.taylor[static_cast<std::size_t>(n) + 1] = a * ws.taylor[static_cast<std::size_t>(n)] + sigma;
    }
    tails.clear();
    for (Index c = 0; c < v.cols(); ++c)
      tails.emplace_back(apply_a, Vector(ws.taylor[static_cast<std::size_t>(m)].col(c)), cfg.krylov_dim);
    for (int j = 1; j < m; ++j)
      values[static_cast<std::size_t>(j)] = detail::evaluate_polynomial_solution(
          ws, w_nodes[static_cast<std::size_t>(j)], m, tails);
    const Matrix& new_end = values.back();
    const double scale = std::max(new_end.norm(), std::numeric_limits<double>::min());
    residual = (new_end - end).norm() / scale;
    rep.residuals.push_back(residual);
    rep.sweeps = sweep + 1;
    end = new_end;
    if (residual < cfg.refine_tol) {
      converged = true;
      break;
    }
  }
  if (report) *report = rep;
  if (!converged)
    throw PropagationError("semi-global step did not converge within max_refine sweeps", residual);
  if (next_guess) {
    next_guess->assign(static_cast<std::size_t>(m), Matrix());
    for (int j = 0; j < m; ++j)
      (*next_guess)[static_cast<std::size_t>(j)] = detail::evaluate_polynomial_solution(
          ws, 1.0 + w_nodes[static_cast<std::size_t>(j)], m, tails);
  }
  return end;
}

template <typename Scalar>
struct PropagationResult {
  std::vector<double> times;
  std::vector<SuperoperatorT<Scalar>> maps;
  int max_sweeps = 0;
  double max_residual = 0.0;
};

/// Number of equal steps of length close to dt covering [t0, t1].
inline int step_count(double t0, double t1, double dt) {
  if (!(t1 > t0)) throw std::invalid_argument("propagation horizon must be positive");
  const int n = static_cast<int>(std::ceil((t1 - t0) / dt - 1e-9));
  return std::max(n, 1);
}

namespace detail {

template <typename Scalar>
PropagationResult<Scalar> propagate_block(const GeneratorFn<Scalar>& gen, double t0, double t1,
                                          const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& start,
                                          PropagatorConfig cfg) {
  const int steps = step_count(t0, t1, cfg.dt);
  cfg.dt = (t1 - t0) / steps;
  PropagationResult<Scalar> out;
  out.times.reserve(static_cast<std::size_t>(steps) + 1);
  out.maps.reserve(static_cast<std::size_t>(steps) + 1);
  out.times.push_back(t0);
  out.maps.push_back(start);
  StepGuess<Scalar> guess, next;
  bool have_guess = false;
  StepWorkspace<Scalar> ws;
  for (int s = 0; s < steps; ++s) {
    const double t = t0 + s * cfg.dt;
    StepReport<Scalar> rep;
    auto v = semiglobal_step<Scalar>(gen, out.maps.back(), t, cfg, have_guess ? &guess : nullptr,
                                     &next, &rep, &ws);
    guess.swap(next);
    have_guess = true;
    out.max_sweeps = std::max(out.max_sweeps, rep.sweeps);
    if (!rep.residuals.empty()) out.max_residual = std::max(out.max_residual, rep.residuals.back());
    out.times.push_back(s + 1 == steps ? t1 : t0 + (s + 1) * cfg.dt);
    out.maps.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

/// G(t_j) on the step grid of [t0, T], G(t0) = identity. dt is shrunk to divide the horizon.
template <typename Scalar>
PropagationResult<Scalar> propagate_map(const GeneratorFn<Scalar>& gen, double t0, double horizon,
                                        const PropagatorConfig& cfg) {
  const Index n = gen(t0).rows();
  cfg.validate(n);
  return detail::propagate_block<Scalar>(gen, t0, horizon,
                                         SuperoperatorT<Scalar>::Identity(n, n), cfg);
}

/// Solves dY/dt = -L(t)^dag Y backward from Y(T) = terminal, so that Tr{Y^dag G} is
/// constant in time. Results are returned on the ascending grid t0 .. T.
template <typename Scalar>
PropagationResult<Scalar> propagate_adjoint(const GeneratorFn<Scalar>& gen, double horizon, double t0,
                                            const SuperoperatorT<Scalar>& terminal,
                                            const PropagatorConfig& cfg) {
  cfg.validate(terminal.rows());
  GeneratorFn<Scalar> reversed = [&gen, horizon, t0](double tau) {
    return SuperoperatorT<Scalar>(gen(horizon + t0 - tau).adjoint());
  };
  PropagationResult<Scalar> back = detail::propagate_block<Scalar>(reversed, t0, horizon, terminal, cfg);
  PropagationResult<Scalar> out;
  out.max_sweeps = back.max_sweeps;
  out.max_residual = back.max_residual;
  const std::size_t count = back.times.size();
  for (std::size_t i = 0; i < count; ++i) {
    out.times.push_back(horizon + t0 - back.times[count - 1 - i]);
    out.maps.push_back(std::move(back.maps[count - 1 - i]));
  }
  out.times.front() = t0;
  out.times.back() = horizon;
  return out;
}

}  // namespace liouctl
