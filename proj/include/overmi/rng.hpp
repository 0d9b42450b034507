#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "overmi/special.hpp"

namespace overmi {

namespace detail {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer; a strong 64-bit mixing bijection.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

/// Counter-based random stream identified by (root_seed, path). Each path
/// element hashes into a 128-bit stream key, so streams for distinct
/// (replicate, imputation, ...) paths are derived collision-free and draw
/// independently of one another and of execution order.
///
/// Streams are cheap value types: copy them freely, send them across
/// threads, but do not share one instance mutably between threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t root_seed)
      : root_seed_(root_seed),
        key_lo_(detail::mix64(root_seed ^ 0x5851F42D4C957F2DULL)),
        key_hi_(detail::mix64(root_seed ^ 0x14057B7EF767814FULL)) {}

  /// Child stream whose path is this stream's path extended by
  /// `child_index`. Depends only on the key, never on draws already made.
  RngStream derive(std::uint64_t child_index) const {
    RngStream child(*this);
    child.path_.push_back(child_index);
    child.key_lo_ = detail::mix64(
        key_lo_ + detail::mix64(child_index ^ 0xD1B54A32D192ED03ULL));
    child.key_hi_ = detail::mix64(
        key_hi_ ^ detail::mix64(child_index + 0x8BB84B93962EACC9ULL));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t root_seed() const { return root_seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

  std::uint64_t next_u64() {
    std::uint64_t z = key_lo_ + counter_ * detail::kGoldenGamma;
    ++counter_;
    z = detail::mix64(z) ^ key_hi_;
    return detail::mix64(z);
  }

  /// Uniform draw on the open interval (0, 1).
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  double standard_normal() { return normal_quantile(uniform_open01()); }

  double normal(double mean, double variance) {
    if (!(variance >= 0.0)) {
      throw std::invalid_argument("normal: variance must be >= 0");
    }
    return mean + std::sqrt(variance) * standard_normal();
  }

  double exponential(double rate) {
    if (!(rate > 0.0)) {
      throw std::invalid_argument("exponential: rate must be > 0");
    }
    return -std::log(uniform_open01()) / rate;
  }

  bool bernoulli(double prob) {
    if (!(prob >= 0.0 && prob <= 1.0)) {
      throw std::invalid_argument("bernoulli: prob must lie in [0,1]");
    }
    return uniform_open01() < prob;
  }

  /// Marsaglia-Tsang gamma draw, shape/scale parameterization.
  double gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) {
      throw std::invalid_argument("gamma: shape and scale must be > 0");
    }
    if (shape < 1.0) {
      const double boost = std::pow(uniform_open01(), 1.0 / shape);
      return gamma(shape + 1.0, scale) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = standard_normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open01();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
        return d * v * scale;
      }
    }
  }

  double chi_square(double df) {
    if (!(df > 0.0)) {
      throw std::invalid_argument("chi_square: df must be > 0");
    }
    return gamma(0.5 * df, 2.0);
  }

 private:
  std::uint64_t root_seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_lo_;
  std::uint64_t key_hi_;
  std::uint64_t counter_ = 0;
};

struct Normal {
  double mean;
  double variance;
};

struct Exponential {
  double rate;
};

struct Bernoulli {
  double prob;
};

struct ChiSquare {
  double df;
};

using Distribution = std::variant<Normal, Exponential, Bernoulli, ChiSquare>;

inline double sample(const Distribution& dist, RngStream& stream) {
  return std::visit(
      [&stream](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Normal>) {
          return stream.normal(d.mean, d.variance);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          return stream.exponential(d.rate);
        } else if constexpr (std::is_same_v<T, Bernoulli>) {
          return stream.bernoulli(d.prob) ? 1.0 : 0.0;
        } else {
          return stream.chi_square(d.df);
        }
      },
      dist);
}

}  // namespace overmi
