#ifndef ENTROPT_VERIFY_HPP
#define ENTROPT_VERIFY_HPP

#include <cmath>
#include <string>
#include <vector>

#include "entropt/nn.hpp"
#include "entropt/objective.hpp"
#include "entropt/optimizers.hpp"
#include "entropt/rng.hpp"
#include "entropt/samplers.hpp"
#include "entropt/tilted.hpp"

namespace entropt {

struct CheckResult {
  std::string name;
  double tolerance = 0.0;
  double observed = 0.0;
  bool pass = false;
};

namespace detail {

inline void add_check(std::vector<CheckResult>& out, std::string name,
                      double tolerance, double observed) {
  out.push_back(CheckResult{std::move(name), tolerance, observed,
                            observed <= tolerance});
}

inline QuadraticObjective verify_quadratic(Eigen::Index d, Rng& rng) {
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.normal();
  Eigen::MatrixXd a = m * m.transpose() + 0.2 * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b(d);
  for (Eigen::Index i = 0; i < d; ++i) b[i] = rng.normal();
  return QuadraticObjective(a, b, 0.0);
}

}  // namespace detail

// Property checks of the analytic identities behind the two regularized
// losses, run by the `verify` subcommand. Everything here is quadrature or
// closed form, no dataset needed; the whole suite takes seconds.
inline std::vector<CheckResult> run_verification_suite() {
  std::vector<CheckResult> out;
  Rng rng(RngStream{2024, 0});
  const QuadratureGrid grid;
  QuadraticObjective quad = detail::verify_quadratic(2, rng);
  DoubleWellObjective dw;
  BumpMixture2D mix;
  const std::vector<const Objective*> objs{&quad, &dw, &mix};

  // F_tau(x) = E_q[f] + KL(q || phi_{x,tau}) at the tilted density
  {
    double worst = 0.0;
    for (const Objective* obj : objs) {
      for (double tau : {0.1, 1.0}) {
        ParamVector x(obj->dim());
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 1.5 * rng.normal();
        const double lhs = local_entropy(*obj, x, tau, grid);
        const double rhs = majorizer_local(*obj, x, x, tau, grid);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
    detail::add_check(out, "variational identity of the smoothed loss", 1e-7,
                      worst);
  }

  // grad F_tau(x) = (x - E_q[X]) / tau against finite differences
  {
    double worst = 0.0;
    const double h = 1e-4;
    for (const Objective* obj : std::vector<const Objective*>{&quad, &mix}) {
      const double tau = 0.5;
      ParamVector x(obj->dim());
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
      TiltedDensity q(*obj, x, tau);
      const ParamVector grad =
          local_entropy_gradient(x, tau, tilted_mean_quadrature(q, grid));
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        ParamVector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (local_entropy(*obj, xp, tau, grid) -
                           local_entropy(*obj, xm, tau, grid)) /
                          (2.0 * h);
        worst = std::max(worst, std::abs(grad[i] - fd));
      }
    }
    detail::add_check(out, "gradient identity via the tilted mean", 1e-5, worst);
  }

  // tilted mean by quadrature vs the linear-solve closed form
  {
    ParamVector x(2);
    x << 1.2, -0.4;
    TiltedDensity q(quad, x, 0.5);
    const double err = (tilted_mean_quadrature(q, grid) -
                        tilted_mean_closed_form(quad, x, 0.5))
                           .norm();
    detail::add_check(out, "tilted mean quadrature vs closed form", 1e-8, err);
  }

  // mean-seeking updates are monotone in F_tau
  {
    double worst = 0.0;
    for (const Objective* obj : objs) {
      EstimatorConfig est;
      est.kind = EstimatorKind::ExactOracle;
      EstimatorState state;
      ParamVector x(obj->dim());
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 1.5 * rng.normal();
      double prev = local_entropy(*obj, x, 0.1, grid);
      for (int k = 0; k < 10; ++k) {
        x = local_entropy_step(*obj, x, 0.1, est, state, RngStream{});
        const double cur = local_entropy(*obj, x, 0.1, grid);
        worst = std::max(worst, cur - prev);
        prev = cur;
      }
    }
    detail::add_check(out, "monotone descent of the mean-seeking scheme", 1e-9,
                      worst);
  }

  // mode-seeking exact root is monotone in F^H_tau = f + tau tr(A)/2
  {
    double worst = 0.0;
    ParamVector x(2);
    x << 2.0, -1.5;
    double prev = quad.value(x);
    for (int k = 0; k < 10; ++k) {
      x = heat_step_exact_quadratic(quad, x, 0.1);
      const double cur = quad.value(x);
      worst = std::max(worst, cur - prev);
      prev = cur;
    }
    detail::add_check(out, "monotone descent of the mode-seeking scheme", 1e-9,
                      worst);
  }

  // blurred quadratic is the raw loss plus tau tr(A)/2
  {
    double worst = 0.0;
    ParamVector x(2);
    x << -0.7, 0.9;
    const double tau = 0.3;
    const double shift = tau * quad.A().trace() / 2.0;
    worst = std::abs(heat_loss(quad, x, tau, grid) - (quad.value(x) + shift));
    detail::add_check(out, "blurred-loss trace identity on the quadratic", 1e-8,
                      worst);
  }

  // Gaussian KL closed form against quadrature
  {
    GaussianDensity p{ParamVector::Zero(1), 1.0};
    ParamVector m1(1);
    m1 << 1.0;
    GaussianDensity q{m1, 2.0};
    TensorGrid g(p.mean, 1.0, grid);
    const double kl = kl_quadrature(
        g, [&](const ParamVector& y) { return p.log_pdf(y); },
        [&](const ParamVector& y) { return q.log_pdf(y); });
    detail::add_check(out, "Gaussian KL quadrature vs closed form", 1e-8,
                      std::abs(kl - kl_divergence(p, q)));
  }

  // partition-invariant sharding of the weighted sample mean
  {
    IsConfig cfg;
    cfg.samples = 1024;
    ParamVector x(2);
    x << 1.0, -1.0;
    const RngStream stream{7, 7};
    const ParamVector base = is_mean(quad, x, 1.0, cfg, stream);
    double worst = 0.0;
    for (int shards : {2, 4}) {
      IsConfig c = cfg;
      c.shards = shards;
      worst = std::max(worst,
                       (is_mean_sharded(quad, x, 1.0, c, stream) - base).norm());
    }
    detail::add_check(out, "shard-merge identity of the weighted mean", 1e-12,
                      worst);
  }

  // stochastic root finding against the linear-solve root
  {
    ParamVector xk(2);
    xk << 1.0, 0.5;
    const double tau = 0.5;
    const ParamVector root =
        (Eigen::MatrixXd::Identity(2, 2) + tau * quad.A())
            .ldlt()
            .solve(xk - tau * quad.b());
    RmConfig cfg;
    cfg.iterations = 10000;
    cfg.inner_samples = 1;
    const ParamVector est = rm_minimize(quad, xk, tau, cfg, RngStream{9, 0});
    detail::add_check(out, "stochastic root finding accuracy", 0.05,
                      (est - root).norm());
  }

  // sampling estimators against the closed-form tilted mean
  {
    auto iso = QuadraticObjective::isotropic(1, 1.0);
    ParamVector x(1);
    x << 2.0;
    SgldConfig sgld;
    sgld.samples = 100000;
    const double sgld_err = std::abs(
        sgld_mean(iso, x, 0.01, sgld, x, RngStream{11, 0}).mean[0] -
        tilted_mean_closed_form(iso, x, 0.01)[0]);
    IsConfig is;
    is.samples = 100000;
    const double is_err =
        std::abs(is_mean(iso, x, 1.0, is, RngStream{12, 0})[0] - 1.0);
    detail::add_check(out, "Langevin and weighted-mean estimator consistency",
                      0.05, std::max(sgld_err, is_err));
  }

  // backprop against finite differences on a tiny net
  {
    DenseNet net({4, 3, 2});
    const ParamVector params = net.init_params(RngStream{13, 0});
    Batch batch;
    batch.images.resize(4, 3);
    batch.labels.resize(3);
    for (int i = 0; i < 3; ++i) {
      for (int p = 0; p < 4; ++p) batch.images(p, i) = rng.uniform();
      batch.labels[i] = static_cast<int>(rng.uniform_int(2));
    }
    const ParamVector grad = net.backward(params, batch);
    ParamVector fd(net.param_count());
    const double h = 1e-5;
    ParamVector p = params;
    for (Eigen::Index i = 0; i < net.param_count(); ++i) {
      p[i] = params[i] + h;
      const double fp = net.forward_loss(p, batch);
      p[i] = params[i] - h;
      const double fm = net.forward_loss(p, batch);
      p[i] = params[i];
      fd[i] = (fp - fm) / (2.0 * h);
    }
    detail::add_check(out, "backprop vs finite differences", 1e-5,
                      (grad - fd).norm() / std::max(1.0, grad.norm()));
  }

  return out;
}

}  // namespace entropt

#endif
