#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace overmi {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Standard normal quantile, Wichura's AS 241 (PPND16) rational
/// approximations, accurate to ~1e-16 over the full open interval.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0,1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) *
                 r +
             4.5921953931549871457e4) *
                r +
            1.3731693765509461125e4) *
               r +
           1.9715909503065514427e3) *
              r +
          1.3314166789178437745e2) *
             r +
         3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) *
                 r +
             2.1213794301586595867e4) *
                r +
            5.3941960214247511077e3) *
               r +
           6.8718700749205790830e2) *
              r +
          4.2313330701600911252e1) *
             r +
         1.0);
    return q * num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
    x = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                  r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
    x = num / den;
  }
  return (q < 0.0) ? -x : x;
}

namespace detail {

/// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double ibeta_reg(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("ibeta_reg: a and b must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Above roughly 1/eps the t distribution is indistinguishable from normal in
// double precision.
inline constexpr double kTLargeDf = 4.5e15;

inline double t_pdf(double x, double df) {
  if (!(df > 0.0)) throw std::domain_error("t_pdf: df must be positive");
  if (std::isinf(df) || df > kTLargeDf) return normal_pdf(x);
  const double log_norm = std::lgamma(0.5 * (df + 1.0)) -
                          std::lgamma(0.5 * df) -
                          0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(x * x / df));
}

inline double t_cdf(double x, double df) {
  if (!(df > 0.0)) throw std::domain_error("t_cdf: df must be positive");
  if (std::isnan(x)) return x;
  if (std::isinf(df) || df > kTLargeDf) return normal_cdf(x);
  if (x == 0.0) return 0.5;
  const double x2 = x * x;
  double tail;
  if (df > 2.0 * x2) {
    // Small |x| relative to df: evaluate through the complement to avoid
    // forming df/(df+x^2) ~ 1.
    tail = 0.5 * (1.0 - ibeta_reg(0.5, 0.5 * df, x2 / (df + x2)));
  } else {
    tail = 0.5 * ibeta_reg(0.5 * df, 0.5, df / (df + x2));
  }
  return (x > 0.0) ? 1.0 - tail : tail;
}

/// Quantile of the t distribution with `df` degrees of freedom (df = inf
/// gives the normal quantile). Solves t_cdf(x) = p by safeguarded Newton;
/// the returned x satisfies |t_cdf(x) - p| well below 1e-10.
inline double t_quantile(double df, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("t_quantile: p must lie in (0,1)");
  }
  if (!(df > 0.0)) throw std::domain_error("t_quantile: df must be positive");
  if (p == 0.5) return 0.0;
  if (std::isinf(df) || df > kTLargeDf) return normal_quantile(p);

  const bool lower = p < 0.5;
  const double pp = lower ? 1.0 - p : p;

  // Cornish-Fisher style start from the normal quantile.
  const double z = normal_quantile(pp);
  double x = z + (z * z * z + z) / (4.0 * df);
  if (!(x > 0.0)) x = z > 0.0 ? z : 1e-8;

  double lo = 0.0;
  double hi = std::max(x, 1.0);
  int guard = 0;
  while (t_cdf(hi, df) < pp) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 2100) break;  // pp < 1 guarantees termination long before
  }
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

  for (int iter = 0; iter < 200; ++iter) {
    const double f = t_cdf(x, df) - pp;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    if (std::abs(f) <= 1e-14) break;
    const double dfdx = t_pdf(x, df);
    double next = x - f / dfdx;
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      next = 0.5 * (lo + hi);
    }
    if (std::abs(next - x) <= 1e-13 * (1.0 + std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return lower ? -x : x;
}

}  // namespace overmi
