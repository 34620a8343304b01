#ifndef ENTROPT_RNG_HPP
#define ENTROPT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

namespace entropt {

// Identifies one reproducible random stream. Estimators that fan out work
// (importance-sampling shards, per-sample draws) derive child streams from
// the same seed so results are invariant to how the work is partitioned.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  RngStream child(std::uint64_t substream) const {
    // splitmix64-style mixing keeps child streams decorrelated
    std::uint64_t z = stream + 0x9e3779b97f4a7c15ULL * (substream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return RngStream{seed, z ^ (z >> 31)};
  }
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// xoshiro256++ with Box-Muller normals. Deterministic in (seed, stream).
class Rng {
 public:
  explicit Rng(RngStream s) {
    std::uint64_t sm = s.seed;
    std::uint64_t sm2 = s.stream ^ 0x6a09e667f3bcc909ULL;
    state_[0] = detail::splitmix64(sm);
    state_[1] = detail::splitmix64(sm2);
    state_[2] = detail::splitmix64(sm);
    state_[3] = detail::splitmix64(sm2);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on (0,1); never returns 0 so log() is safe
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Bulk fill via the Marsaglia polar transform; it skips the trig calls
  // of the single-draw path, and this fill dominates the sampler runtimes.
  void fill_normal(Eigen::Ref<Eigen::VectorXd> out) {
    const Eigen::Index n = out.size();
    Eigen::Index i = 0;
    while (i + 1 < n) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s >= 1.0 || s == 0.0) continue;
      const double m = std::sqrt(-2.0 * std::log(s) / s);
      out[i++] = u * m;
      out[i++] = v * m;
    }
    if (i < n) out[i] = normal();
  }

  // uniform integer in [0, n)
  std::int64_t uniform_int(std::int64_t n) {
    // rejection-free Lemire-style bounded draw is overkill here; modulo bias
    // at n << 2^64 is far below every tolerance in this project
    return static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(n));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace entropt

#endif
