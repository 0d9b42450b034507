#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "overmi/errors.hpp"
#include "overmi/special.hpp"

namespace overmi {

struct RubinSummary {
  double eta_mi;
  double w_m;  // within-imputation variance
  double b_m;  // between-imputation variance
  double v_rubin;
};

/// Rubin's combining rule: eta_MI = mean of estimates, W = mean of the
/// complete-sample variances, B = sample variance of the estimates,
/// V = W + (1 + 1/M) B.
inline RubinSummary rubin_combine(std::span<const double> estimates,
                                  std::span<const double> variances) {
  const std::size_t m = estimates.size();
  if (m < 2 || variances.size() != m) {
    throw InsufficientImputationsError("rubin_combine: needs M >= 2");
  }
  RubinSummary out{};
  for (std::size_t j = 0; j < m; ++j) {
    out.eta_mi += estimates[j];
    out.w_m += variances[j];
  }
  const double dm = static_cast<double>(m);
  out.eta_mi /= dm;
  out.w_m /= dm;
  for (double e : estimates) {
    const double d = e - out.eta_mi;
    out.b_m += d * d;
  }
  out.b_m /= dm - 1.0;
  out.v_rubin = out.w_m + (1.0 + 1.0 / dm) * out.b_m;
  return out;
}

/// C_M: within-unit spread of the nonrespondent imputations,
///   C = 1 / (n^2 (M-1)) sum_k sum_{i>r} (g_ik - gbar_i)^2.
/// `g_over_nonresp` is M x (n - r); `n_total` is the full sample size.
inline double compute_cm(const Eigen::MatrixXd& g_over_nonresp,
                         Eigen::Index n_total) {
  const Eigen::Index m = g_over_nonresp.rows();
  if (m < 2) throw InsufficientImputationsError("compute_cm: needs M >= 2");
  const double n = static_cast<double>(n_total);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < g_over_nonresp.cols(); ++i) {
    const double mean = g_over_nonresp.col(i).mean();
    ss += (g_over_nonresp.col(i).array() - mean).square().sum();
  }
  return ss / (n * n * static_cast<double>(m - 1));
}

struct DTerms {
  double d_mn;
  double d_mr;
};

/// Over-imputation cross-covariance terms. `d` is M x n with columns centered
/// per unit (sum over imputations ~ 0):
///   D_{M,n} = (M-1)^-1 sum_k (n^-1 sum_{i<=n} d_ik)^2
///           - (M-1)^-1 sum_k n^-2 sum_{i<=n} d_ik^2,
/// and D_{M,r} sums units only up to r while keeping the same n scaling.
inline DTerms compute_d_terms(const Eigen::MatrixXd& d, Eigen::Index r) {
  const Eigen::Index m = d.rows();
  const Eigen::Index n = d.cols();
  if (m < 2) {
    throw InsufficientImputationsError("compute_d_terms: needs M >= 2");
  }
  if (r < 0 || r > n) {
    throw std::invalid_argument("compute_d_terms: r out of range");
  }
  const double dn = static_cast<double>(n);
  const double denom = static_cast<double>(m - 1);
  DTerms out{0.0, 0.0};
  for (Eigen::Index k = 0; k < m; ++k) {
    double sum_n = 0.0;
    double sumsq_n = 0.0;
    double sum_r = 0.0;
    double sumsq_r = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = d(k, i);
      sum_n += v;
      sumsq_n += v * v;
      if (i < r) {
        sum_r += v;
        sumsq_r += v * v;
      }
    }
    out.d_mn += (sum_n / dn) * (sum_n / dn) - sumsq_n / (dn * dn);
    out.d_mr += (sum_r / dn) * (sum_r / dn) - sumsq_r / (dn * dn);
  }
  out.d_mn /= denom;
  out.d_mr /= denom;
  return out;
}

inline constexpr double kVarianceFloor = 1e-12;

struct NewVariance {
  double value;
  bool floored;
};

/// Over-imputation variance estimator V = (W - C) + (D_n - D_r) + B/M.
/// Finite samples can push it below zero; the value is then floored so
/// interval construction stays defined, and the event is flagged.
inline NewVariance new_combine(const RubinSummary& rubin, double c_m,
                               const DTerms& d, int m) {
  const double raw = (rubin.w_m - c_m) + (d.d_mn - d.d_mr) +
                     rubin.b_m / static_cast<double>(m);
  if (raw <= 0.0) return {kVarianceFloor, true};
  return {raw, false};
}

/// Small-sample degrees of freedom for Rubin's interval (Barnard & Rubin):
///   nu = nu1 nu2 / (nu1 + nu2), nu1 = (M-1)/lambda^2,
///   nu2 = (nu_com+1)/(nu_com+3) * nu_com * (1-lambda), nu_com = n - 3,
///   lambda = (1 + 1/M) B / (W + (1 + 1/M) B).
inline double barnard_rubin_df(double w_m, double b_m, int m, Eigen::Index n) {
  if (m < 2) throw InsufficientImputationsError("barnard_rubin_df: M >= 2");
  if (n < 4) throw std::invalid_argument("barnard_rubin_df: needs n >= 4");
  const double total = w_m + (1.0 + 1.0 / m) * b_m;
  if (!(total > 0.0)) {
    throw DegenerateVarianceError("barnard_rubin_df: zero total variance");
  }
  const double nu_com = static_cast<double>(n - 3);
  const double lambda = (1.0 + 1.0 / m) * b_m / total;
  const double nu2 =
      (nu_com + 1.0) / (nu_com + 3.0) * nu_com * (1.0 - lambda);
  if (b_m == 0.0) return nu2;  // lambda = 0, nu1 = inf
  const double nu1 = static_cast<double>(m - 1) / (lambda * lambda);
  return nu1 * nu2 / (nu1 + nu2);
}

struct ConfidenceInterval {
  double level;
  double lower;
  double upper;

  double width() const { return upper - lower; }
  bool contains(double value) const { return lower <= value && value <= upper; }
};

inline ConfidenceInterval confidence_interval(double eta_mi, double variance,
                                              double df, double level) {
  if (!(variance >= 0.0)) {
    throw std::invalid_argument("confidence_interval: variance must be >= 0");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence_interval: level must be in (0,1)");
  }
  const double half =
      variance == 0.0
          ? 0.0
          : t_quantile(df, 1.0 - 0.5 * (1.0 - level)) * std::sqrt(variance);
  return {level, eta_mi - half, eta_mi + half};
}

/// Full variance decomposition for one replicate set of M completed datasets.
struct PooledResult {
  double eta_mi = 0.0;
  double w_m = 0.0;
  double b_m = 0.0;
  double c_m = 0.0;
  double d_mn = 0.0;
  double d_mr = 0.0;
  double v_rubin = 0.0;
  double v_new = 0.0;
  double df_rubin = 0.0;
  double df_new = 0.0;
  int m = 0;
  bool v_new_floored = false;
};

/// Pools M completed datasets given their complete-sample estimates and the
/// per-unit over-imputation transforms g(y*_ik) (M x n, respondents first).
inline PooledResult pool_moments(std::span<const double> estimates,
                                 std::span<const double> variances,
                                 const Eigen::MatrixXd& g_over,
                                 Eigen::Index r) {
  const Eigen::Index n = g_over.cols();
  const int m = static_cast<int>(g_over.rows());
  if (static_cast<std::size_t>(m) != estimates.size()) {
    throw std::invalid_argument("pool_moments: estimate count != M rows");
  }
  const RubinSummary rubin = rubin_combine(estimates, variances);
  PooledResult out;
  out.eta_mi = rubin.eta_mi;
  out.w_m = rubin.w_m;
  out.b_m = rubin.b_m;
  out.v_rubin = rubin.v_rubin;
  out.m = m;
  out.c_m = compute_cm(g_over.rightCols(n - r), n);
  const Eigen::MatrixXd centered =
      g_over.rowwise() - g_over.colwise().mean();
  const DTerms d = compute_d_terms(centered, r);
  out.d_mn = d.d_mn;
  out.d_mr = d.d_mr;
  const NewVariance nv = new_combine(rubin, out.c_m, d, m);
  out.v_new = nv.value;
  out.v_new_floored = nv.floored;
  out.df_rubin = rubin.v_rubin > 0.0
                     ? barnard_rubin_df(rubin.w_m, rubin.b_m, m, n)
                     : std::numeric_limits<double>::infinity();
  out.df_new = static_cast<double>(m - 1);
  return out;
}

}  // namespace overmi
