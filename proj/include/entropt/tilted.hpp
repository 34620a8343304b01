#ifndef ENTROPT_TILTED_HPP
#define ENTROPT_TILTED_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

#include "entropt/objective.hpp"
#include "entropt/quadrature.hpp"

namespace entropt {

inline double log_two_pi() { return std::log(2.0 * std::numbers::pi); }

// Isotropic Gaussian with mean m and covariance tau * I.
struct GaussianDensity {
  ParamVector mean;
  double tau;

  GaussianDensity(ParamVector m, double t) : mean(std::move(m)), tau(t) {
    if (!(tau > 0.0)) throw std::invalid_argument("gaussian: tau must be > 0");
  }

  double log_pdf(const ParamVector& x) const {
    const double d = static_cast<double>(mean.size());
    return -0.5 * d * (log_two_pi() + std::log(tau)) -
           (x - mean).squaredNorm() / (2.0 * tau);
  }
};

// Unnormalized density exp(-f(x') - |x - x'|^2 / (2 tau)) with a lazily
// computed quadrature normalization.
class TiltedDensity {
 public:
  TiltedDensity(const Objective& obj, ParamVector center, double tau)
      : obj_(&obj), center_(std::move(center)), tau_(tau) {
    if (!(tau_ > 0.0)) throw std::invalid_argument("tilted: tau must be > 0");
    obj.check_point(center_);
  }

  const Objective& objective() const { return *obj_; }
  const ParamVector& center() const { return center_; }
  double tau() const { return tau_; }

  double log_unnormalized(const ParamVector& xp) const {
    obj_->check_point(xp);
    return -obj_->value(xp) - (center_ - xp).squaredNorm() / (2.0 * tau_);
  }

  // log Z = log of integral of the unnormalized density; computed with the
  // first grid it is asked for and cached.
  double log_norm(const QuadratureGrid& grid) const {
    if (!log_z_) {
      TensorGrid g(center_, std::sqrt(tau_), grid);
      log_z_ = log_integral_exp(
          g, [&](const ParamVector& x) { return log_unnormalized(x); });
    }
    return *log_z_;
  }

  double log_pdf(const ParamVector& xp, const QuadratureGrid& grid) const {
    return log_unnormalized(xp) - log_norm(grid);
  }

 private:
  const Objective* obj_;
  ParamVector center_;
  double tau_;
  mutable std::optional<double> log_z_;
};

// F_tau(x) = -log integral exp(-f) phi_{x,tau}; quadrature oracle, dim <= 3.
inline double local_entropy(const Objective& obj, const ParamVector& x,
                            double tau, const QuadratureGrid& grid) {
  TiltedDensity td(obj, x, tau);
  const double d = static_cast<double>(x.size());
  // integral exp(-f) phi = Z_q * (2 pi tau)^(-d/2)
  return 0.5 * d * (log_two_pi() + std::log(tau)) - td.log_norm(grid);
}

// F^H_tau(x) = integral f phi_{x,tau}; quadrature oracle, dim <= 3.
inline double heat_loss(const Objective& obj, const ParamVector& x, double tau,
                        const QuadratureGrid& grid) {
  obj.check_point(x);
  GaussianDensity phi(x, tau);
  TensorGrid g(x, std::sqrt(tau), grid);
  return integral_weighted(
      g, [&](const ParamVector& p) { return phi.log_pdf(p); }, 0.0,
      [&](const ParamVector& p) { return obj.value(p); });
}

// E_{X ~ q_{x,tau}}[X] by quadrature; the normalization supplies the
// log-sum-exp shift for the signed component integrals.
inline ParamVector tilted_mean_quadrature(const TiltedDensity& td,
                                          const QuadratureGrid& grid) {
  const double log_z = td.log_norm(grid);
  TensorGrid g(td.center(), std::sqrt(td.tau()), grid);
  ParamVector mean = ParamVector::Zero(td.center().size());
  g.for_each_node([&](const ParamVector& x, double log_w) {
    const double lp = td.log_unnormalized(x) + log_w - log_z;
    if (lp > -745.0) mean += std::exp(lp) * x;
  });
  return mean;
}

// Closed form: when f is quadratic, q_{x,tau} is Gaussian with mean
// (A + I/tau)^{-1} (x/tau - b).
inline ParamVector tilted_mean_closed_form(const QuadraticObjective& q,
                                           const ParamVector& x, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tilted mean: tau must be > 0");
  q.check_point(x);
  const Eigen::Index d = q.dim();
  Eigen::MatrixXd precision =
      q.A() + Eigen::MatrixXd::Identity(d, d) / tau;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(precision);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw std::runtime_error("tilted mean: singular precision matrix");
  return ldlt.solve(x / tau - q.b());
}

// grad F_tau(x) = (x - E_{q_{x,tau}}[X]) / tau
inline ParamVector local_entropy_gradient(const ParamVector& x, double tau,
                                          const ParamVector& mean) {
  if (!(tau > 0.0))
    throw std::invalid_argument("local entropy gradient: tau must be > 0");
  if (x.size() != mean.size())
    throw std::invalid_argument("local entropy gradient: dimension mismatch");
  return (x - mean) / tau;
}

// KL between two isotropic Gaussians, closed form.
inline double kl_divergence(const GaussianDensity& p, const GaussianDensity& q) {
  const double d = static_cast<double>(p.mean.size());
  const double r = p.tau / q.tau;
  return 0.5 * (d * r + (p.mean - q.mean).squaredNorm() / q.tau - d +
                d * std::log(q.tau / p.tau));
}

// Generic quadrature KL over a grid covering the mass of p.
template <typename LogP, typename LogQ>
double kl_quadrature(const TensorGrid& grid, LogP&& log_p, LogQ&& log_q) {
  const double kl = integral_weighted(
      grid, log_p, 0.0, [&](const ParamVector& x) {
        const double lp = log_p(x);
        const double lq = log_q(x);
        if (!std::isfinite(lq) && lp > -700.0)
          throw std::runtime_error("kl: q vanishes where p has mass");
        return lp - lq;
      });
  if (std::isnan(kl)) throw std::runtime_error("kl: non-finite integrand");
  return kl;
}

inline double kl_divergence(const TiltedDensity& p, const GaussianDensity& q,
                            const QuadratureGrid& grid) {
  TensorGrid g(p.center(), std::sqrt(p.tau()), grid);
  return kl_quadrature(
      g, [&](const ParamVector& x) { return p.log_pdf(x, grid); },
      [&](const ParamVector& x) { return q.log_pdf(x); });
}

inline double kl_divergence(const GaussianDensity& p, const TiltedDensity& q,
                            const QuadratureGrid& grid) {
  TensorGrid g(p.mean, std::sqrt(p.tau), grid);
  return kl_quadrature(
      g, [&](const ParamVector& x) { return p.log_pdf(x); },
      [&](const ParamVector& x) { return q.log_pdf(x, grid); });
}

// A(x, xt) = integral f dq_{xt,tau} + KL(q_{xt,tau} || phi_{x,tau});
// majorizes F_tau with equality at x = xt.
inline double majorizer_local(const Objective& obj, const ParamVector& x,
                              const ParamVector& xt, double tau,
                              const QuadratureGrid& grid) {
  TiltedDensity q(obj, xt, tau);
  GaussianDensity phi(x, tau);
  const double log_z = q.log_norm(grid);
  TensorGrid g(xt, std::sqrt(tau), grid);
  return integral_weighted(
      g, [&](const ParamVector& p) { return q.log_unnormalized(p); }, log_z,
      [&](const ParamVector& p) {
        return obj.value(p) + q.log_unnormalized(p) - log_z - phi.log_pdf(p);
      });
}

// A^H(x, xt) = log integral exp(f) dq_{xt,tau} + KL(phi_{x,tau} || q_{xt,tau});
// majorizes F^H_tau.
inline double majorizer_heat(const Objective& obj, const ParamVector& x,
                             const ParamVector& xt, double tau,
                             const QuadratureGrid& grid) {
  TiltedDensity q(obj, xt, tau);
  const double log_z = q.log_norm(grid);
  TensorGrid gq(xt, std::sqrt(tau), grid);
  const double log_exp_f = log_integral_exp(gq, [&](const ParamVector& p) {
    return obj.value(p) + q.log_unnormalized(p) - log_z;
  });
  GaussianDensity phi(x, tau);
  return log_exp_f + kl_divergence(phi, q, grid);
}

}  // namespace entropt

#endif
