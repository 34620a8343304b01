#ifndef ENTROPT_LANDSCAPE_HPP
#define ENTROPT_LANDSCAPE_HPP

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "entropt/objective.hpp"
#include "entropt/quadrature.hpp"
#include "entropt/tilted.hpp"

namespace entropt {

struct LandscapePoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double f = 0.0;
  double f_tau = 0.0;
  double fh_tau = 0.0;
};

// Raw loss and both regularized losses sampled over an n x n lattice on
// [lo, hi]^2; both smoothed surfaces come from quadrature.
inline std::vector<LandscapePoint> landscape_grid(
    const Objective& obj, double tau, int n, double lo, double hi,
    const QuadratureGrid& spec = {}) {
  if (obj.dim() != 2)
    throw std::invalid_argument("landscape: objective must be 2-D");
  if (n < 2) throw std::invalid_argument("landscape: grid needs n >= 2");
  if (!(lo < hi)) throw std::invalid_argument("landscape: empty range");
  std::vector<LandscapePoint> points;
  points.reserve(static_cast<std::size_t>(n) * n);
  const double step = (hi - lo) / (n - 1);
  ParamVector x(2);
  for (int i = 0; i < n; ++i) {
    x[0] = lo + i * step;
    for (int j = 0; j < n; ++j) {
      x[1] = lo + j * step;
      LandscapePoint p;
      p.x1 = x[0];
      p.x2 = x[1];
      p.f = obj.value(x);
      p.f_tau = local_entropy(obj, x, tau, spec);
      p.fh_tau = heat_loss(obj, x, tau, spec);
      points.push_back(p);
    }
  }
  return points;
}

inline const LandscapePoint& landscape_argmin_f_tau(
    const std::vector<LandscapePoint>& points) {
  if (points.empty()) throw std::invalid_argument("landscape: empty grid");
  const LandscapePoint* best = &points.front();
  for (const LandscapePoint& p : points)
    if (p.f_tau < best->f_tau) best = &p;
  return *best;
}

inline void write_landscape_csv(const std::string& path,
                                const std::vector<LandscapePoint>& points) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("landscape: cannot write " + path);
  std::fprintf(f, "x1,x2,f,F_tau,FH_tau\n");
  for (const LandscapePoint& p : points)
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", p.x1, p.x2, p.f,
                 p.f_tau, p.fh_tau);
  std::fclose(f);
}

}  // namespace entropt

#endif
