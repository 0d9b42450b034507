#pragma once

#include <charconv>
#include <span>
#include <string>

#include "overmi/errors.hpp"

namespace overmi {

/// Moment estimand: the mean of y, or the proportion of y strictly below a
/// threshold. `g` is the induced per-unit transform.
class Estimand {
 public:
  static Estimand mean() { return Estimand(Kind::Mean, 0.0); }
  static Estimand proportion_below(double threshold) {
    return Estimand(Kind::ProportionBelow, threshold);
  }

  bool is_proportion() const { return kind_ == Kind::ProportionBelow; }
  double threshold() const { return threshold_; }

  double g(double y) const {
    return is_proportion() ? (y < threshold_ ? 1.0 : 0.0) : y;
  }

  std::string label() const {
    if (!is_proportion()) return "mean";
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), threshold_);
    return "prop_lt(" + std::string(buf, end) + ")";
  }

  friend bool operator==(const Estimand& a, const Estimand& b) {
    return a.kind_ == b.kind_ &&
           (a.kind_ == Kind::Mean || a.threshold_ == b.threshold_);
  }

 private:
  enum class Kind { Mean, ProportionBelow };
  Estimand(Kind kind, double threshold) : kind_(kind), threshold_(threshold) {}

  Kind kind_;
  double threshold_;
};

struct CompleteSampleEstimate {
  double eta_hat;
  double v_hat;
};

/// Sample mean of g(y_i).
inline double mme_point(const Estimand& estimand, std::span<const double> y) {
  if (y.empty()) throw DegenerateSampleError("mme_point: empty sample");
  double sum = 0.0;
  for (double yi : y) sum += estimand.g(yi);
  return sum / static_cast<double>(y.size());
}

/// Complete-sample variance estimator of the point estimate:
///   mean:       n^-1 (n-1)^-1 sum (y_i - ybar)^2     (two-pass)
///   proportion: (n-1)^-1 phat (1 - phat)
inline double mme_variance(const Estimand& estimand,
                           std::span<const double> y) {
  const auto n = y.size();
  if (n < 2) throw DegenerateSampleError("mme_variance: needs n >= 2");
  const double eta = mme_point(estimand, y);
  if (estimand.is_proportion()) {
    return eta * (1.0 - eta) / static_cast<double>(n - 1);
  }
  double ss = 0.0;
  for (double yi : y) {
    const double d = yi - eta;
    ss += d * d;
  }
  return ss / (static_cast<double>(n) * static_cast<double>(n - 1));
}

inline CompleteSampleEstimate mme_estimate(const Estimand& estimand,
                                           std::span<const double> y) {
  return {mme_point(estimand, y), mme_variance(estimand, y)};
}

}  // namespace overmi
