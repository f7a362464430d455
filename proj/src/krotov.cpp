#include "liouctl/krotov.hpp"

#include <cmath>
#include <sstream>

namespace liouctl {

void OptimizationConfig::validate(int channels) const {
  if (!(lambda > 0)) throw std::invalid_argument("optimizer lambda must be positive");
  if (!channel_lambda.empty()) {
    if (static_cast<int>(channel_lambda.size()) != channels)
      throw std::invalid_argument("optimizer channel_lambda needs one value per channel");
    for (double l : channel_lambda)
      if (!(l > 0)) throw std::invalid_argument("optimizer channel_lambda values must be positive");
  }
  if (max_iters < 0) throw std::invalid_argument("optimizer max_iters must be non-negative");
  if (!(target_infidelity >= 0)) throw std::invalid_argument("optimizer target_infidelity must be >= 0");
  if (stagnation_window < 1) throw std::invalid_argument("optimizer stagnation_window must be >= 1");
}

double OptimizationConfig::lambda_for(int channel) const {
  return channel_lambda.empty() ? lambda : channel_lambda[static_cast<std::size_t>(channel)];
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::TargetReached:
      return "target";
    case Termination::MaxIterations:
      return "max_iters";
    case Termination::Stagnation:
      return "stagnation";
  }
  return "unknown";
}

ControlProblem::ControlProblem(const GateSpec& spec, const NoiseModel& noise) : spec_(spec), noise_(noise) {
  noise_.validate();
  if (!spec.basis.hermitian()) throw std::invalid_argument("control problem needs a Hermitian operator basis");
  require_dims(spec.drift.rows() == spec.basis.dim(), "control problem: drift and basis dimensions differ");
  drift_ = real_superop(commutator_superop<double>(spec.drift, spec.basis));
  for (const auto& c : spec.controls) {
    controls_.push_back(real_superop(commutator_superop<double>(c.op, spec.basis)));
    curvature_.push_back(real_superop(double_commutator_superop<double>(c.op, spec.basis)));
  }
  target_ = real_superop(spec.target);
  target_norm_ = target_.squaredNorm();
  if (!(target_norm_ > 0)) throw std::invalid_argument("control problem: zero-norm target");
}

RealSuperoperator ControlProblem::generator(const double* eps) const {
  RealSuperoperator h = drift_;
  for (int k = 0; k < n_channels(); ++k) h += eps[k] * controls_[static_cast<std::size_t>(k)];
  if (!noise_.active()) return h;
  RealSuperoperator l = h;
  if (noise_.kind == NoiseKind::Amplitude) {
    for (int k = 0; k < n_channels(); ++k)
      l -= (noise_.rate * eps[k] * eps[k]) * curvature_[static_cast<std::size_t>(k)];
  } else {
    l.noalias() += noise_.rate * (h * h);
  }
  return l;
}

std::vector<RealSuperoperator> ControlProblem::directions(const double* eps) const {
  std::vector<RealSuperoperator> out;
  if (!noise_.active()) return controls_;
  if (noise_.kind == NoiseKind::Amplitude) {
    for (int k = 0; k < n_channels(); ++k)
      out.push_back(controls_[static_cast<std::size_t>(k)] -
                    (2.0 * noise_.rate * eps[k]) * curvature_[static_cast<std::size_t>(k)]);
    return out;
  }
  RealSuperoperator h = drift_;
  for (int k = 0; k < n_channels(); ++k) h += eps[k] * controls_[static_cast<std::size_t>(k)];
  for (int k = 0; k < n_channels(); ++k) {
    const RealSuperoperator& c = controls_[static_cast<std::size_t>(k)];
    out.push_back(c + noise_.rate * (c * h + h * c));
  }
  return out;
}

double ControlProblem::objective(const RealSuperoperator& g) const {
  return target_.cwiseProduct(g).sum() / target_norm_;
}

namespace {

struct StepCache {
  std::vector<RealSuperoperator> maps;                      // E_j
  std::vector<std::vector<RealSuperoperator>> derivatives;  // D_{j,k}
};

void check_field(const ControlProblem& problem, const ControlField& field) {
  if (field.n_channels() != problem.n_channels())
    throw std::invalid_argument("field channel count does not match the gate");
  if (std::abs(field.horizon() - problem.spec().horizon) > 1e-9 * std::max(1.0, field.horizon()))
    throw std::invalid_argument("field horizon does not match the gate");
}

StepDerivatives<double> step_at(const ControlProblem& problem, const double* eps, double dt) {
  return frozen_step_propagator<double>(problem.generator(eps), problem.directions(eps), dt);
}

Eigen::VectorXd column(const ControlField& field, int j) { return field.values().col(j); }

}  // namespace

Evaluation evaluate(const ControlProblem& problem, const ControlField& field) {
  check_field(problem, field);
  const Index n = problem.liouville_dim();
  Evaluation ev;
  ev.maps.reserve(static_cast<std::size_t>(field.n_steps()) + 1);
  ev.maps.push_back(RealSuperoperator::Identity(n, n));
  for (int j = 0; j < field.n_steps(); ++j) {
    const Eigen::VectorXd eps = column(field, j);
    const RealSuperoperator e = (problem.generator(eps.data()) * field.dt()).exp();
    ev.maps.push_back(e * ev.maps.back());
  }
  ev.objective = problem.objective(ev.maps.back());
  ev.infidelity = 1.0 - ev.objective;
  return ev;
}

Evaluation evaluate_semiglobal(const ControlProblem& problem, const ControlField& field,
                               const PropagatorConfig& cfg) {
  check_field(problem, field);
  const Index n = problem.liouville_dim();
  PropagatorConfig step_cfg = cfg;
  step_cfg.dt = field.dt();
  step_cfg.validate(n);
  Evaluation ev;
  ev.maps.push_back(RealSuperoperator::Identity(n, n));
  for (int j = 0; j < field.n_steps(); ++j) {
    const Eigen::VectorXd eps = column(field, j);
    const RealSuperoperator l = problem.generator(eps.data());
    GeneratorFn<double> gen = [&l](double) { return l; };
    ev.maps.push_back(semiglobal_step<double>(gen, ev.maps.back(), j * field.dt(), step_cfg));
  }
  ev.objective = problem.objective(ev.maps.back());
  ev.infidelity = 1.0 - ev.objective;
  return ev;
}

Eigen::MatrixXd gradient(const ControlProblem& problem, const ControlField& field) {
  check_field(problem, field);
  const int steps = field.n_steps();
  const Index n = problem.liouville_dim();
  const double dt = field.dt();
  StepCache cache;
  std::vector<RealSuperoperator> g(static_cast<std::size_t>(steps) + 1);
  g[0] = RealSuperoperator::Identity(n, n);
  for (int j = 0; j < steps; ++j) {
    const Eigen::VectorXd eps = column(field, j);
    auto st = step_at(problem, eps.data(), dt);
    g[static_cast<std::size_t>(j) + 1] = st.map * g[static_cast<std::size_t>(j)];
    cache.maps.push_back(std::move(st.map));
    cache.derivatives.push_back(std::move(st.derivatives));
  }
  Eigen::MatrixXd grad(problem.n_channels(), steps);
  RealSuperoperator y = problem.target() / problem.target_norm();
  for (int j = steps - 1; j >= 0; --j) {
    for (int k = 0; k < problem.n_channels(); ++k)
      grad(k, j) = y.cwiseProduct(cache.derivatives[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] *
                                  g[static_cast<std::size_t>(j)])
                       .sum() /
                   dt;
    y = cache.maps[static_cast<std::size_t>(j)].transpose() * y;
  }
  return grad;
}

OptimizationTrace krotov_optimize(const ControlProblem& problem, const ControlField& field0,
                                  const OptimizationConfig& cfg, const IterationCallback& on_iteration) {
  check_field(problem, field0);
  cfg.validate(problem.n_channels());
  const int steps = field0.n_steps();
  const int channels = problem.n_channels();
  const Index n = problem.liouville_dim();
  const double dt = field0.dt();
  const double gamma = problem.noise().active() ? problem.noise().rate : 0.0;

  OptimizationTrace trace;
  trace.field = field0;
  ControlField& field = trace.field;

  StepCache cache;
  cache.maps.resize(static_cast<std::size_t>(steps));
  cache.derivatives.resize(static_cast<std::size_t>(steps));
  RealSuperoperator g = RealSuperoperator::Identity(n, n);
  for (int j = 0; j < steps; ++j) {
    const Eigen::VectorXd eps = column(field, j);
    auto st = step_at(problem, eps.data(), dt);
    g = st.map * g;
    cache.maps[static_cast<std::size_t>(j)] = std::move(st.map);
    cache.derivatives[static_cast<std::size_t>(j)] = std::move(st.derivatives);
  }
  double j_current = problem.objective(g);

  auto record = [&](int iteration, int rejected) {
    IterationRecord r;
    r.iteration = iteration;
    r.objective = j_current;
    r.infidelity = 1.0 - j_current;
    r.energy = field.energy();
    r.rejected_updates = rejected;
    trace.history.push_back(r);
    if (on_iteration) on_iteration(r);
  };
  record(0, 0);

  std::vector<RealSuperoperator> y(static_cast<std::size_t>(steps) + 1);
  for (int it = 1;; ++it) {
    if (1.0 - j_current <= cfg.target_infidelity) {
      trace.reason = Termination::TargetReached;
      break;
    }
    if (it > cfg.max_iters) {
      trace.reason = Termination::MaxIterations;
      break;
    }
    const int window = cfg.stagnation_window;
    if (static_cast<int>(trace.history.size()) > window) {
      const double old = trace.history[trace.history.size() - 1 - static_cast<std::size_t>(window)].objective;
      const double gain = j_current - old;
      if (gain <= cfg.stagnation_eps * std::max(std::abs(j_current), 1e-300)) {
        trace.reason = Termination::Stagnation;
        break;
      }
    }

    // Backward pass with the previous iteration's step maps.
    y[static_cast<std::size_t>(steps)] = problem.target() / problem.target_norm();
    for (int j = steps - 1; j >= 0; --j)
      y[static_cast<std::size_t>(j)] = cache.maps[static_cast<std::size_t>(j)].transpose() * y[static_cast<std::size_t>(j) + 1];

    // Forward pass with immediate updates.
    int rejected = 0;
    g = RealSuperoperator::Identity(n, n);
    Eigen::VectorXd delta(channels);
    for (int j = 0; j < steps; ++j) {
      const RealSuperoperator& yn = y[static_cast<std::size_t>(j) + 1];
      const double shape = field.shape()(j);
      for (int k = 0; k < channels; ++k) {
        const RealSuperoperator dl = cache.derivatives[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] / dt;
        delta(k) = krotov_increment<double>(yn, g, dl, problem.curvature(k), shape, cfg.lambda_for(k), gamma);
      }
      const RealSuperoperator yg = yn * g.transpose();  // Re Tr{Y^T E G} = sum(E .* (Y G^T))
      const double c_old = cache.maps[static_cast<std::size_t>(j)].cwiseProduct(yg).sum();
      bool accepted = false;
      if (delta.cwiseAbs().maxCoeff() > 0.0) {
        for (int attempt = 0; attempt < 9 && !accepted; ++attempt) {
          Eigen::VectorXd eps = column(field, j) + delta;
          // Trial with the step map only; derivatives are formed once a step is kept.
          RealSuperoperator e = (problem.generator(eps.data()) * dt).exp();
          const double c_new = e.cwiseProduct(yg).sum();
          if (c_new >= c_old) {
            field.values().col(j) = eps;
            cache.maps[static_cast<std::size_t>(j)] = std::move(e);
            cache.derivatives[static_cast<std::size_t>(j)] = step_at(problem, eps.data(), dt).derivatives;
            accepted = true;
          } else {
            delta *= 0.5;
          }
        }
      }
      if (!accepted) ++rejected;
      g = cache.maps[static_cast<std::size_t>(j)] * g;
    }
    const double j_new = problem.objective(g);
    if (j_new < j_current - 1e-10) {
      std::ostringstream msg;
      msg << "Krotov iteration " << it << " lowered the objective from " << j_current << " to " << j_new;
      throw MonotonicityError(msg.str());
    }
    j_current = j_new;
    record(it, rejected);
  }
  trace.final_infidelity = 1.0 - j_current;
  return trace;
}

}  // namespace liouctl
