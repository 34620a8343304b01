#ifndef ENTROPT_QUADRATURE_HPP
#define ENTROPT_QUADRATURE_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace entropt {

// Tensor-product trapezoid rule on [c - w*sigma, c + w*sigma] per axis.
// For integrands with sub-Gaussian tails the trapezoid rule is spectrally
// accurate, so n = 201 nodes and w = 10 push truncation and discretization
// error below 1e-12.
struct QuadratureGrid {
  int nodes_per_dim = 201;
  double half_width = 10.0;   // in multiples of the length scale sigma
  double sigma_scale = 1.0;   // inflate sigma for stiff integrands

  void validate() const {
    if (nodes_per_dim < 33)
      throw std::invalid_argument("quadrature: need at least 33 nodes per dim");
    if (half_width < 8.0)
      throw std::invalid_argument("quadrature: half-width below 8 sigma");
  }
};

constexpr Eigen::Index kMaxQuadratureDim = 3;

namespace detail {

// Streaming log-sum-exp accumulator.
class LogSumExp {
 public:
  void add(double log_term) {
    if (log_term == -std::numeric_limits<double>::infinity()) return;
    if (log_term > max_) {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    } else {
      sum_ += std::exp(log_term - max_);
    }
  }
  double value() const {
    if (sum_ == 0.0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

}  // namespace detail

// Materialized lattice: per-axis nodes plus the common log trapezoid weight.
class TensorGrid {
 public:
  TensorGrid(const Eigen::VectorXd& center, double sigma,
             const QuadratureGrid& spec) {
    spec.validate();
    if (center.size() > kMaxQuadratureDim)
      throw std::invalid_argument(
          "quadrature: dimension too large for a tensor-product oracle");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw std::invalid_argument("quadrature: bad length scale");
    dim_ = center.size();
    n_ = spec.nodes_per_dim;
    const double s = sigma * spec.sigma_scale;
    step_ = 2.0 * spec.half_width * s / (n_ - 1);
    axes_.resize(dim_);
    for (Eigen::Index a = 0; a < dim_; ++a) {
      axes_[a].resize(n_);
      for (int i = 0; i < n_; ++i)
        axes_[a][i] = center[a] - spec.half_width * s + i * step_;
    }
  }

  Eigen::Index dim() const { return dim_; }
  std::int64_t node_count() const {
    std::int64_t c = 1;
    for (Eigen::Index a = 0; a < dim_; ++a) c *= n_;
    return c;
  }

  // Visits every node as (point, log_weight). The trapezoid weight is
  // step^d, halved once per axis endpoint.
  template <typename Visitor>
  void for_each_node(Visitor&& visit) const {
    Eigen::VectorXd point(dim_);
    std::vector<int> idx(static_cast<std::size_t>(dim_), 0);
    const double log_step = std::log(step_);
    const double log_half = std::log(0.5);
    while (true) {
      double log_w = dim_ * log_step;
      for (Eigen::Index a = 0; a < dim_; ++a) {
        point[a] = axes_[a][idx[static_cast<std::size_t>(a)]];
        const int i = idx[static_cast<std::size_t>(a)];
        if (i == 0 || i == n_ - 1) log_w += log_half;
      }
      visit(point, log_w);
      Eigen::Index a = 0;
      for (; a < dim_; ++a) {
        if (++idx[static_cast<std::size_t>(a)] < n_) break;
        idx[static_cast<std::size_t>(a)] = 0;
      }
      if (a == dim_) break;
    }
  }

 private:
  Eigen::Index dim_ = 0;
  int n_ = 0;
  double step_ = 0.0;
  std::vector<Eigen::VectorXd> axes_;
};

// log of integral of exp(log_f(x)) dx over the grid.
template <typename LogF>
double log_integral_exp(const TensorGrid& grid, LogF&& log_f) {
  detail::LogSumExp acc;
  grid.for_each_node([&](const Eigen::VectorXd& x, double log_w) {
    const double lf = log_f(x);
    if (std::isnan(lf))
      throw std::runtime_error("quadrature: non-finite integrand");
    acc.add(lf + log_w);
  });
  return acc.value();
}

// Integral of g(x) * exp(log_p(x) - log_shift) where the caller supplies a
// stabilizing shift (typically the max of log_p over the grid). Used for
// signed integrands such as means and KL integrands.
template <typename LogP, typename G>
double integral_weighted(const TensorGrid& grid, LogP&& log_p, double log_shift,
                         G&& g) {
  double acc = 0.0;
  grid.for_each_node([&](const Eigen::VectorXd& x, double log_w) {
    const double lp = log_p(x) + log_w - log_shift;
    if (lp > -745.0) acc += std::exp(lp) * g(x);
  });
  return acc;
}

}  // namespace entropt

#endif
