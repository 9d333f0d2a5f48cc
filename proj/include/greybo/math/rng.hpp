#ifndef GREYBO_MATH_RNG_HPP
#define GREYBO_MATH_RNG_HPP

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace greybo {

// Mixes a base seed with stream indices so that independent components
// (runs, repetitions, multi-start batches) get decorrelated substreams
// that are stable across thread schedules.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed, stream)) {}

  // Uniform on [0, 1). Explicit construction from raw bits keeps the
  // sequence identical across standard library implementations.
  double uniform() {
    const std::uint64_t bits = engine_() >> 11;  // 53 random bits
    return static_cast<double>(bits) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (deterministic, pair-cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    const double u = uniform();
    int v = lo + static_cast<int>(u * (static_cast<double>(hi) - lo + 1));
    return v > hi ? hi : v;
  }

  // Uniform on the unit ball in R^n (direction times radius^(1/n)).
  Eigen::VectorXd unit_ball(Eigen::Index n) {
    Eigen::VectorXd dir = normal_vector(n);
    const double norm = dir.norm();
    if (norm == 0.0) return Eigen::VectorXd::Zero(n);
    const double radius = std::pow(uniform(), 1.0 / static_cast<double>(n));
    return dir * (radius / norm);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Latin hypercube sample of `count` points in the box [lower, upper].
inline std::vector<Eigen::VectorXd> latin_hypercube(const Eigen::VectorXd& lower,
                                                    const Eigen::VectorXd& upper,
                                                    int count, Rng& rng) {
  const Eigen::Index dim = lower.size();
  std::vector<Eigen::VectorXd> points(static_cast<std::size_t>(count),
                                      Eigen::VectorXd(dim));
  std::vector<int> perm(static_cast<std::size_t>(count));
  for (Eigen::Index d = 0; d < dim; ++d) {
    for (int i = 0; i < count; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = count - 1; i > 0; --i) {
      const int j = rng.uniform_int(0, i);
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    for (int i = 0; i < count; ++i) {
      const double stratum = (perm[static_cast<std::size_t>(i)] + rng.uniform()) /
                             static_cast<double>(count);
      points[static_cast<std::size_t>(i)][d] = lower[d] + (upper[d] - lower[d]) * stratum;
    }
  }
  return points;
}

}  // namespace greybo

#endif  // GREYBO_MATH_RNG_HPP
