#ifndef ENTROPT_OPTIMIZERS_HPP
#define ENTROPT_OPTIMIZERS_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "entropt/objective.hpp"
#include "entropt/quadrature.hpp"
#include "entropt/rng.hpp"
#include "entropt/samplers.hpp"
#include "entropt/tilted.hpp"

namespace entropt {

// tau(k) = tau0 / (1 + tau1)^k for scoped schedules, tau0 when constant.
struct TauSchedule {
  enum class Kind { Constant, Scoped };
  Kind kind = Kind::Constant;
  double tau0 = 0.01;
  double tau1 = 0.0;

  void validate() const {
    if (!(tau0 > 0.0)) throw std::invalid_argument("tau schedule: tau0 must be > 0");
    if (tau1 < 0.0) throw std::invalid_argument("tau schedule: tau1 must be >= 0");
  }
};

inline double tau_at(const TauSchedule& s, std::int64_t k) {
  if (k < 0) throw std::invalid_argument("tau schedule: k must be >= 0");
  if (s.kind == TauSchedule::Kind::Constant) return s.tau0;
  return s.tau0 / std::pow(1.0 + s.tau1, static_cast<double>(k));
}

enum class EstimatorKind { Sgld, ImportanceSampling, RobbinsMonro, ExactOracle };

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::Sgld;
  SgldConfig sgld;
  IsConfig is;
  RmConfig rm;
  QuadratureGrid grid;  // exact oracle only
};

// Carried across outer iterations; holds the SGLD warm-start state.
struct EstimatorState {
  std::optional<ParamVector> sgld_state;
};

// Algorithm step for local entropy: x_{k+1} = estimate of E_{q_{x_k,tau}}[X],
// equivalently one gradient-descent step on F_tau with learning rate tau.
inline ParamVector local_entropy_step(const Objective& obj,
                                      const ParamVector& x_k, double tau,
                                      const EstimatorConfig& cfg,
                                      EstimatorState& state, RngStream stream,
                                      const BatchSource& batches = {}) {
  switch (cfg.kind) {
    case EstimatorKind::Sgld: {
      const ParamVector& init =
          (cfg.sgld.warm_start && state.sgld_state) ? *state.sgld_state : x_k;
      SgldResult r = sgld_mean(obj, x_k, tau, cfg.sgld, init, stream, batches);
      state.sgld_state = std::move(r.final_state);
      return r.mean;
    }
    case EstimatorKind::ImportanceSampling:
      return is_mean_sharded(obj, x_k, tau, cfg.is, stream, batches);
    case EstimatorKind::ExactOracle: {
      TiltedDensity q(obj, x_k, tau);
      return tilted_mean_quadrature(q, cfg.grid);
    }
    case EstimatorKind::RobbinsMonro:
      throw std::invalid_argument(
          "local entropy step: Robbins-Monro estimates the mode-seeking "
          "minimizer, use heat_reg_step");
  }
  throw std::logic_error("unreachable");
}

// Algorithm step for heat regularization: x_{k+1} minimizes
// x -> KL(phi_{x,tau} || q_{x_k,tau}) via Robbins-Monro.
inline ParamVector heat_reg_step(const Objective& obj, const ParamVector& x_k,
                                 double tau, const RmConfig& cfg,
                                 RngStream stream,
                                 const BatchSource& batches = {}) {
  return rm_minimize(obj, x_k, tau, cfg, stream, batches);
}

// Exact root of the stationarity condition when f is quadratic:
// x - x_k + tau (A x + b) = 0, i.e. x = (I + tau A)^{-1} (x_k - tau b).
inline ParamVector heat_step_exact_quadratic(const QuadraticObjective& q,
                                             const ParamVector& x_k,
                                             double tau) {
  const Eigen::Index d = q.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d) + tau * q.A();
  return m.ldlt().solve(x_k - tau * q.b());
}

// One per-update record of a training run.
struct TraceRow {
  std::int64_t step = 0;
  double tau = 0.0;
  double loss = 0.0;
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
  double diagnostic = std::numeric_limits<double>::quiet_NaN();
};

struct TrainTrace {
  std::vector<TraceRow> rows;
  bool aborted = false;
  std::string abort_reason;
  std::int64_t phase_boundary = -1;  // warm-switch runs only
};

// Optional held-out evaluation hook; returns accuracy for the snapshot.
using EvalFn = std::function<double(const ParamVector&)>;

struct OuterConfig {
  std::int64_t updates = 500;  // K
  TauSchedule tau;
  EstimatorConfig estimator;
  double eta = -1.0;  // < 0 couples the learning rate to tau (the default)
  std::int64_t eval_cadence = 10;
  RngStream stream;

  void validate() const {
    if (updates < 1) throw std::invalid_argument("outer: K must be >= 1");
    if (eval_cadence < 1)
      throw std::invalid_argument("outer: eval cadence must be >= 1");
    tau.validate();
  }
};

constexpr double kDivergenceCeiling = 1e6;

namespace detail {

inline double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename StepFn>
TrainTrace outer_loop(const Objective& obj, const ParamVector& x0,
                      const OuterConfig& cfg, const BatchSource& batches,
                      const EvalFn& eval, StepFn&& step,
                      std::int64_t step_offset = 0) {
  cfg.validate();
  obj.check_point(x0);
  TrainTrace trace;
  ParamVector x = x0;
  for (std::int64_t k = 0; k < cfg.updates; ++k) {
    const double tau = tau_at(cfg.tau, k);
    const double t0 = now_seconds();
    TraceRow row;
    row.step = step_offset + k + 1;
    row.tau = tau;
    try {
      x = step(x, tau, k);
    } catch (const std::exception& e) {
      trace.aborted = true;
      trace.abort_reason = e.what();
      return trace;
    }
    row.wall_seconds = now_seconds() - t0;
    const MinibatchSpec probe = draw_batch(batches);
    row.loss = objective_value(obj, x, probe);
    if (!std::isfinite(row.loss) || row.loss > kDivergenceCeiling) {
      trace.aborted = true;
      trace.abort_reason =
          "objective value " + std::to_string(row.loss) + " at update " +
          std::to_string(row.step);
      trace.rows.push_back(row);
      return trace;
    }
    if (eval && ((k + 1) % cfg.eval_cadence == 0 || k + 1 == cfg.updates))
      row.accuracy = eval(x);
    trace.rows.push_back(row);
  }
  return trace;
}

}  // namespace detail

// Plain SGD baseline: x_{k+1} = x_k - eta * minibatch gradient.
inline TrainTrace sgd_run(const Objective& obj, const ParamVector& x0,
                          double eta, std::int64_t updates,
                          const BatchSource& batches, const EvalFn& eval = {},
                          std::int64_t eval_cadence = 10,
                          ParamVector* out_params = nullptr) {
  if (eta < 0.0) throw std::invalid_argument("sgd: eta must be >= 0");
  if (updates < 0) throw std::invalid_argument("sgd: K must be >= 0");
  obj.check_point(x0);
  TrainTrace trace;
  ParamVector x = x0;
  for (std::int64_t k = 0; k < updates; ++k) {
    const double t0 = detail::now_seconds();
    const MinibatchSpec batch = draw_batch(batches);
    x -= eta * objective_gradient(obj, x, batch);
    TraceRow row;
    row.step = k + 1;
    row.tau = 0.0;
    row.wall_seconds = detail::now_seconds() - t0;
    row.loss = objective_value(obj, x, draw_batch(batches));
    if (!std::isfinite(row.loss) || row.loss > kDivergenceCeiling) {
      trace.aborted = true;
      trace.abort_reason = "objective value diverged at update " +
                           std::to_string(row.step);
      trace.rows.push_back(row);
      return trace;
    }
    if (eval && ((k + 1) % eval_cadence == 0 || k + 1 == updates))
      row.accuracy = eval(x);
    trace.rows.push_back(row);
  }
  if (out_params) *out_params = std::move(x);
  return trace;
}

// Outer loop of the two-step schemes under a tau schedule. The estimator
// kind selects the step: Robbins-Monro performs the mode-seeking heat step,
// everything else the mean-seeking local-entropy step. An eta >= 0
// decouples the learning rate from tau via
// x_{k+1} = x_k - (eta/tau)(x_k - mean); monotonicity is only guaranteed
// for the default eta = tau coupling.
inline TrainTrace regularized_run(const Objective& obj, const ParamVector& x0,
                                  const OuterConfig& cfg,
                                  const BatchSource& batches = {},
                                  const EvalFn& eval = {},
                                  ParamVector* out_params = nullptr) {
  EstimatorState state;
  ParamVector last = x0;
  auto step = [&](const ParamVector& x, double tau,
                  std::int64_t k) -> ParamVector {
    const RngStream s = cfg.stream.child(static_cast<std::uint64_t>(k));
    ParamVector next;
    if (cfg.estimator.kind == EstimatorKind::RobbinsMonro) {
      next = heat_reg_step(obj, x, tau, cfg.estimator.rm, s, batches);
    } else {
      const ParamVector mean =
          local_entropy_step(obj, x, tau, cfg.estimator, state, s, batches);
      next = (cfg.eta < 0.0) ? mean : x - (cfg.eta / tau) * (x - mean);
    }
    last = next;
    return next;
  };
  TrainTrace trace = detail::outer_loop(obj, x0, cfg, batches, eval, step);
  if (out_params) *out_params = std::move(last);
  return trace;
}

// SGD warm phase followed by a regularized phase; traces concatenate and
// the boundary index is recorded.
inline TrainTrace warm_switch_run(const Objective& obj, const ParamVector& x0,
                                  double sgd_eta, std::int64_t sgd_updates,
                                  const OuterConfig& reg_cfg,
                                  const BatchSource& batches = {},
                                  const EvalFn& eval = {},
                                  ParamVector* out_params = nullptr) {
  ParamVector switch_point = x0;
  TrainTrace trace = sgd_run(obj, x0, sgd_eta, sgd_updates, batches, eval,
                             reg_cfg.eval_cadence, &switch_point);
  trace.phase_boundary = sgd_updates;
  if (trace.aborted) return trace;

  EstimatorState state;
  ParamVector last = switch_point;
  auto step = [&](const ParamVector& x, double tau,
                  std::int64_t k) -> ParamVector {
    const RngStream s = reg_cfg.stream.child(static_cast<std::uint64_t>(k));
    ParamVector next;
    if (reg_cfg.estimator.kind == EstimatorKind::RobbinsMonro) {
      next = heat_reg_step(obj, x, tau, reg_cfg.estimator.rm, s, batches);
    } else {
      const ParamVector mean = local_entropy_step(obj, x, tau, reg_cfg.estimator,
                                                  state, s, batches);
      next = (reg_cfg.eta < 0.0) ? mean : x - (reg_cfg.eta / tau) * (x - mean);
    }
    last = next;
    return next;
  };
  if (reg_cfg.updates > 0) {
    TrainTrace reg = detail::outer_loop(obj, switch_point, reg_cfg, batches,
                                        eval, step, sgd_updates);
    trace.rows.insert(trace.rows.end(), reg.rows.begin(), reg.rows.end());
    trace.aborted = reg.aborted;
    trace.abort_reason = reg.abort_reason;
  }
  if (out_params) *out_params = std::move(last);
  return trace;
}

}  // namespace entropt

#endif
