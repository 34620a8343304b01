#ifndef ENTROPT_OBJECTIVE_HPP
#define ENTROPT_OBJECTIVE_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>

namespace entropt {

using ParamVector = Eigen::VectorXd;

inline bool all_finite(const ParamVector& x) { return x.allFinite(); }

// Dataset row indices forming one minibatch.
using MinibatchSpec = std::vector<std::int64_t>;

// Objective f : R^d -> R, optionally with gradient and minibatch structure
// f = (1/N) sum_i f_i. Implementations are immutable and pure: value and
// gradient depend only on (x, batch), so concurrent calls are safe.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Eigen::Index dim() const = 0;

  virtual double value(const ParamVector& x) const = 0;

  virtual bool has_gradient() const { return true; }
  virtual ParamVector gradient(const ParamVector& x) const = 0;

  virtual bool has_minibatch() const { return false; }
  virtual std::int64_t dataset_size() const { return 0; }

  virtual double value(const ParamVector& x, const MinibatchSpec& batch) const {
    check_batch(batch);
    return value(x);
  }
  virtual ParamVector gradient(const ParamVector& x,
                               const MinibatchSpec& batch) const {
    check_batch(batch);
    return gradient(x);
  }

  void check_point(const ParamVector& x) const {
    if (x.size() != dim())
      throw std::invalid_argument("objective: point has dimension " +
                                  std::to_string(x.size()) + ", expected " +
                                  std::to_string(dim()));
    if (!all_finite(x))
      throw std::invalid_argument("objective: non-finite point");
  }

 protected:
  void check_batch(const MinibatchSpec& batch) const {
    if (!has_minibatch()) return;
    const std::int64_t n = dataset_size();
    for (std::int64_t i : batch)
      if (i < 0 || i >= n)
        throw std::out_of_range("objective: batch index " + std::to_string(i) +
                                " outside [0," + std::to_string(n) + ")");
  }
};

// f(x) = 1/2 x'Ax + b'x + c with A symmetric PSD; carries closed forms used
// as oracles throughout the test suite.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Eigen::MatrixXd A, Eigen::VectorXd b, double c)
      : A_(std::move(A)), b_(std::move(b)), c_(c) {
    if (A_.rows() != A_.cols() || A_.rows() != b_.size())
      throw std::invalid_argument("quadratic: inconsistent shapes");
    if ((A_ - A_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("quadratic: A not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A_);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw std::invalid_argument("quadratic: A not positive semidefinite");
  }

  static QuadraticObjective isotropic(Eigen::Index d, double a) {
    return QuadraticObjective(a * Eigen::MatrixXd::Identity(d, d),
                              Eigen::VectorXd::Zero(d), 0.0);
  }

  Eigen::Index dim() const override { return b_.size(); }
  double value(const ParamVector& x) const override {
    check_point(x);
    return 0.5 * x.dot(A_ * x) + b_.dot(x) + c_;
  }
  ParamVector gradient(const ParamVector& x) const override {
    check_point(x);
    return A_ * x + b_;
  }

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }
  double c() const { return c_; }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  double c_;
};

// f == 0; degenerate case where the tilted density is the Gaussian itself.
class ZeroObjective final : public Objective {
 public:
  explicit ZeroObjective(Eigen::Index d) : d_(d) {}
  Eigen::Index dim() const override { return d_; }
  double value(const ParamVector& x) const override {
    check_point(x);
    return 0.0;
  }
  ParamVector gradient(const ParamVector& x) const override {
    check_point(x);
    return ParamVector::Zero(d_);
  }

 private:
  Eigen::Index d_;
};

// f(x) = (x^2 - 1)^2, minima at +-1, barrier at 0.
class DoubleWellObjective final : public Objective {
 public:
  Eigen::Index dim() const override { return 1; }
  double value(const ParamVector& x) const override {
    check_point(x);
    const double s = x[0] * x[0] - 1.0;
    return s * s;
  }
  ParamVector gradient(const ParamVector& x) const override {
    check_point(x);
    ParamVector g(1);
    g[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0);
    return g;
  }
};

// 2-D sum of three inverted Gaussian bumps with heterogeneous widths:
// one narrow/deep, one wide/shallow, one intermediate. The narrow bump is
// the global minimum of f; smoothing at large scale favors the wide basin.
class BumpMixture2D final : public Objective {
 public:
  BumpMixture2D() {
    amp_ = {1.2, 0.8, 0.5};
    sigma_ = {0.15, 1.0, 0.4};
    centers_.resize(3);
    centers_[0] = Eigen::Vector2d(1.2, 0.9);    // narrow, deep
    centers_[1] = Eigen::Vector2d(-1.0, -0.8);  // wide, shallow
    centers_[2] = Eigen::Vector2d(-0.2, 1.1);   // intermediate
  }

  Eigen::Index dim() const override { return 2; }

  double value(const ParamVector& x) const override {
    check_point(x);
    double f = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double r2 = (x - centers_[i]).squaredNorm();
      f -= amp_[i] * std::exp(-r2 / (2.0 * sigma_[i] * sigma_[i]));
    }
    return f;
  }

  ParamVector gradient(const ParamVector& x) const override {
    check_point(x);
    ParamVector g = ParamVector::Zero(2);
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector2d dxy = x - centers_[i];
      const double s2 = sigma_[i] * sigma_[i];
      g += (amp_[i] / s2) * std::exp(-dxy.squaredNorm() / (2.0 * s2)) * dxy;
    }
    return g;
  }

  const Eigen::Vector2d& narrow_center() const { return centers_[0]; }
  const Eigen::Vector2d& wide_center() const { return centers_[1]; }

 private:
  std::array<double, 3> amp_;
  std::array<double, 3> sigma_;
  std::vector<Eigen::Vector2d> centers_;
};

// Central-difference gradient; verification oracle for every gradient path.
inline ParamVector finite_difference_gradient(const Objective& obj,
                                              const ParamVector& x, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite differences: h must be > 0");
  obj.check_point(x);
  ParamVector g(obj.dim());
  ParamVector xp = x;
  for (Eigen::Index i = 0; i < obj.dim(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = obj.value(xp);
    xp[i] = xi - h;
    const double fm = obj.value(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace entropt

#endif
