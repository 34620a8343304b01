#ifndef ENTROPT_SAMPLERS_HPP
#define ENTROPT_SAMPLERS_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "entropt/objective.hpp"
#include "entropt/rng.hpp"

namespace entropt {

// Supplies a fresh minibatch per call; empty result means full-batch.
using BatchSource = std::function<MinibatchSpec()>;

inline MinibatchSpec draw_batch(const BatchSource& src) {
  return src ? src() : MinibatchSpec{};
}

inline double objective_value(const Objective& obj, const ParamVector& x,
                              const MinibatchSpec& batch) {
  return batch.empty() ? obj.value(x) : obj.value(x, batch);
}

inline ParamVector objective_gradient(const Objective& obj,
                                      const ParamVector& x,
                                      const MinibatchSpec& batch) {
  return batch.empty() ? obj.gradient(x) : obj.gradient(x, batch);
}

// Thrown when a stochastic chain leaves the finite domain.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::int64_t step)
      : std::runtime_error(what + " at step " + std::to_string(step)),
        step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

// Temperatures eps_j = 1 / (eps0 + j), strictly decreasing.
inline double temperature_schedule(double eps0, std::int64_t j) {
  if (!(eps0 > 0.0))
    throw std::invalid_argument("temperature schedule: eps0 must be > 0");
  return 1.0 / (eps0 + static_cast<double>(j));
}

struct SgldConfig {
  std::int64_t samples = 1000;  // J
  double eps0 = 1000.0;         // temperature offset
  bool warm_start = true;

  void validate() const {
    if (samples < 1) throw std::invalid_argument("sgld: J must be >= 1");
    if (!(eps0 > 0.0)) throw std::invalid_argument("sgld: eps0 must be > 0");
  }
};

struct IsConfig {
  std::int64_t samples = 1000;  // J
  int shards = 1;               // L
  // weights are exp(-weight_scale * f); a dataset-backed objective reports
  // the per-example mean loss, so scale = batch size weighs by the summed
  // batch loss, which is what the reference training runs do
  double weight_scale = 1.0;

  void validate() const {
    if (samples < 1) throw std::invalid_argument("is: J must be >= 1");
    if (shards < 1) throw std::invalid_argument("is: L must be >= 1");
    if (samples % shards != 0)
      throw std::invalid_argument("is: L must divide J");
    if (!(weight_scale > 0.0))
      throw std::invalid_argument("is: weight scale must be > 0");
  }
};

struct RmConfig {
  std::int64_t iterations = 30;  // J
  std::int64_t inner_samples = 30;  // M, Gaussian draws per iteration
  double c = 0.1;
  double alpha = 0.7;  // step sizes a_j = c * j^(-alpha)
  // a_j = c * j^(+alpha) instead: the growing schedule the reference
  // training runs use; only sensible for small J (steps must stay < 2)
  bool growing_steps = false;

  void validate() const {
    if (iterations < 1) throw std::invalid_argument("rm: J must be >= 1");
    if (inner_samples < 1) throw std::invalid_argument("rm: M must be >= 1");
    if (!(c > 0.0)) throw std::invalid_argument("rm: c must be > 0");
    if (!(alpha > 0.5) || !(alpha <= 1.0))
      throw std::invalid_argument("rm: alpha must lie in (1/2, 1]");
  }
};

struct SgldResult {
  ParamVector mean;
  ParamVector final_state;
};

// Langevin chain targeting q_{x,tau}; returns the temperature-weighted
// average of the J post-update states together with the last state for
// warm-starting the next outer iteration. The injected noise has standard
// deviation eps_j, so at small temperatures the chain is close to a
// deterministic proximal descent on f + |x - x'|^2 / (2 tau); this scale
// (rather than variance eps_j) is what reproduces the reference training
// trajectories.
inline SgldResult sgld_mean(const Objective& obj, const ParamVector& x,
                            double tau, const SgldConfig& cfg,
                            const ParamVector& init, RngStream stream,
                            const BatchSource& batches = {}) {
  cfg.validate();
  obj.check_point(x);
  obj.check_point(init);
  if (!(tau > 0.0)) throw std::invalid_argument("sgld: tau must be > 0");

  Rng rng(stream);
  ParamVector state = init;
  ParamVector weighted_sum = ParamVector::Zero(x.size());
  ParamVector noise(x.size());
  double weight_sum = 0.0;
  for (std::int64_t j = 0; j < cfg.samples; ++j) {
    const double eps = temperature_schedule(cfg.eps0, j);
    const ParamVector grad =
        objective_gradient(obj, state, draw_batch(batches));
    rng.fill_normal(noise);
    state -= (eps / 2.0) * (grad - (x - state) / tau);
    state += eps * noise;
    if (!all_finite(state))
      throw DivergenceError("sgld: chain state diverged", j);
    weighted_sum += eps * state;
    weight_sum += eps;
  }
  return SgldResult{weighted_sum / weight_sum, std::move(state)};
}

namespace detail {

struct IsShardAccum {
  double max_log_w = -std::numeric_limits<double>::infinity();
  double weight_sum = 0.0;           // sum exp(log w - max_log_w)
  Eigen::VectorXd weighted_sum;      // sum exp(log w - max_log_w) * x

  void add(double log_w, const Eigen::VectorXd& x) {
    if (log_w > max_log_w) {
      const double scale =
          (weight_sum == 0.0) ? 0.0 : std::exp(max_log_w - log_w);
      weight_sum *= scale;
      weighted_sum *= scale;
      max_log_w = log_w;
    }
    const double w = std::exp(log_w - max_log_w);
    weight_sum += w;
    weighted_sum += w * x;
  }
};

// One shard of the self-normalized estimate over samples [begin, end).
// Sample j owns substream j of the caller's stream, so the result is
// independent of how samples are sharded.
inline IsShardAccum is_shard(const Objective& obj, const ParamVector& x,
                             double tau, std::int64_t begin, std::int64_t end,
                             double weight_scale, RngStream stream,
                             const MinibatchSpec& batch) {
  IsShardAccum acc;
  acc.weighted_sum = Eigen::VectorXd::Zero(x.size());
  const double sigma = std::sqrt(tau);
  ParamVector draw(x.size());
  for (std::int64_t j = begin; j < end; ++j) {
    Rng rng(stream.child(static_cast<std::uint64_t>(j)));
    rng.fill_normal(draw);
    draw = x + sigma * draw;
    const double f = objective_value(obj, draw, batch);
    if (!std::isfinite(f))
      throw DivergenceError("is: non-finite objective value", j);
    acc.add(-weight_scale * f, draw);
  }
  return acc;
}

inline ParamVector is_merge(const std::vector<IsShardAccum>& shards) {
  double max_log = -std::numeric_limits<double>::infinity();
  for (const auto& s : shards) max_log = std::max(max_log, s.max_log_w);
  double weight_sum = 0.0;
  Eigen::VectorXd weighted_sum =
      Eigen::VectorXd::Zero(shards.front().weighted_sum.size());
  for (const auto& s : shards) {
    const double scale = std::exp(s.max_log_w - max_log);
    weight_sum += scale * s.weight_sum;
    weighted_sum += scale * s.weighted_sum;
  }
  return weighted_sum / weight_sum;
}

}  // namespace detail

// Self-normalized importance sampling estimate of E_{q_{x,tau}}[X] using
// draws from phi_{x,tau} and weights exp(-f), max-shifted before
// exponentiating. Shards run concurrently and merge in log space; the
// result is invariant to the shard count.
inline ParamVector is_mean_sharded(const Objective& obj, const ParamVector& x,
                                   double tau, const IsConfig& cfg,
                                   RngStream stream,
                                   const BatchSource& batches = {}) {
  cfg.validate();
  obj.check_point(x);
  if (!(tau > 0.0)) throw std::invalid_argument("is: tau must be > 0");

  const MinibatchSpec batch = draw_batch(batches);
  const std::int64_t per_shard = cfg.samples / cfg.shards;
  std::vector<detail::IsShardAccum> accs(static_cast<std::size_t>(cfg.shards));
  if (cfg.shards == 1) {
    accs[0] = detail::is_shard(obj, x, tau, 0, cfg.samples, cfg.weight_scale,
                               stream, batch);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(
        static_cast<std::size_t>(cfg.shards));
    for (int l = 0; l < cfg.shards; ++l) {
      workers.emplace_back([&, l] {
        try {
          accs[static_cast<std::size_t>(l)] =
              detail::is_shard(obj, x, tau, l * per_shard, (l + 1) * per_shard,
                               cfg.weight_scale, stream, batch);
        } catch (...) {
          errors[static_cast<std::size_t>(l)] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return detail::is_merge(accs);
}

inline ParamVector is_mean(const Objective& obj, const ParamVector& x,
                           double tau, const IsConfig& cfg, RngStream stream,
                           const BatchSource& batches = {}) {
  IsConfig single = cfg;
  single.shards = 1;
  return is_mean_sharded(obj, x, tau, single, stream, batches);
}

// Robbins-Monro iteration for the stationarity condition
// h(x) = x - x_k + tau * E_{Y ~ phi_{x,tau}} grad f(Y) = 0,
// the minimizer of x -> KL(phi_{x,tau} || q_{x_k,tau}).
inline ParamVector rm_minimize(const Objective& obj, const ParamVector& x_k,
                               double tau, const RmConfig& cfg,
                               RngStream stream,
                               const BatchSource& batches = {}) {
  cfg.validate();
  obj.check_point(x_k);
  if (!obj.has_gradient())
    throw std::invalid_argument("rm: objective is not gradient-capable");
  if (!(tau > 0.0)) throw std::invalid_argument("rm: tau must be > 0");

  Rng rng(stream);
  const double sigma = std::sqrt(tau);
  ParamVector state = x_k;
  ParamVector grad_avg(x_k.size());
  ParamVector draw(x_k.size());
  for (std::int64_t j = 1; j <= cfg.iterations; ++j) {
    const double a_j = cfg.c * std::pow(static_cast<double>(j),
                                        cfg.growing_steps ? cfg.alpha
                                                          : -cfg.alpha);
    const MinibatchSpec batch = draw_batch(batches);
    grad_avg.setZero();
    for (std::int64_t m = 0; m < cfg.inner_samples; ++m) {
      rng.fill_normal(draw);
      draw = state + sigma * draw;
      grad_avg += objective_gradient(obj, draw, batch);
    }
    grad_avg /= static_cast<double>(cfg.inner_samples);
    state -= a_j * (state - x_k + tau * grad_avg);
    if (!all_finite(state))
      throw DivergenceError("rm: iterate diverged", j);
  }
  return state;
}

}  // namespace entropt

#endif
