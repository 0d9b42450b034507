#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "overmi/datagen.hpp"
#include "overmi/estimators.hpp"
#include "overmi/rng.hpp"
#include "overmi/special.hpp"

namespace overmi {

/// Population moments feeding the asymptotic bias formulas for Rubin's
/// variance estimator under method-of-moments analysis. theta = (beta,
/// sigma^2); the information matrix is taken under the respondent covariate
/// distribution, matching the asymptotics of the respondent-only MLE.
struct BiasInputs {
  Eigen::Index n = 0;
  double p_resp = 0.0;                // population response rate
  double sigma2 = 0.0;                // model error variance
  double cond_var_nonresp = 0.0;      // E[var{g(Y)|X} | delta = 0]
  double cond_var_marg = 0.0;         // E[var{g(Y)|X}]
  double var_g = 0.0;                 // var{g(Y)}
  double var_cond_mean = 0.0;         // var[E{g(Y)|X}]
  Eigen::VectorXd mdot0;              // E{mdot(X) | delta = 0}
  Eigen::VectorXd mdot1;              // E{mdot(X) | delta = 1}
  Eigen::VectorXd mdot_marg;          // E{mdot(X)}
  Eigen::MatrixXd info_inv;           // inverse Fisher information
  double e1x = 0.0;                   // E(X | delta = 1), raw covariate
  double e0x = 0.0;                   // E(X | delta = 0)
  double e1x2 = 0.0;                  // E(X^2 | delta = 1)
};

/// General missing-at-random bias:
///   2 n^-1 (1-p) ( E[var{g(Y)|X} | delta=0] - mdot0' I^-1 mdot1 ).
inline double bias_general(const BiasInputs& in) {
  if (in.mdot0.size() != in.mdot1.size() ||
      in.info_inv.rows() != in.mdot0.size() ||
      in.info_inv.cols() != in.mdot1.size()) {
    throw std::invalid_argument(
        "bias_general: mdot vectors and info_inv dimensions disagree");
  }
  const double cross = in.mdot0.dot(in.info_inv * in.mdot1);
  return 2.0 / static_cast<double>(in.n) * (1.0 - in.p_resp) *
         (in.cond_var_nonresp - cross);
}

/// Missing-completely-at-random form: 2 p (1-p) (var_mme - var_mle), with the
/// respondent-sample variances of the two complete-sample estimators.
inline double bias_mcar(double var_mme, double var_mle, double p_resp) {
  if (!(var_mme >= 0.0) || !(var_mle >= 0.0)) {
    throw std::invalid_argument("bias_mcar: variances must be >= 0");
  }
  return 2.0 * p_resp * (1.0 - p_resp) * (var_mme - var_mle);
}

/// No-intercept linear model with g(y) = y:
///   2 n^-1 (1-p) sigma^2 E1(X^2)^-1 { E1(X^2) - E0(X) E1(X) }.
inline double bias_no_intercept(Eigen::Index n, double p_resp, double sigma2,
                                double e1x, double e0x, double e1x2) {
  if (!(e1x2 > 0.0)) {
    throw std::invalid_argument("bias_no_intercept: E1(X^2) must be > 0");
  }
  return 2.0 / static_cast<double>(n) * (1.0 - p_resp) * sigma2 *
         (e1x2 - e0x * e1x) / e1x2;
}

/// The two asymptotic variance components of the (M = inf) multiple
/// imputation estimator: var = V1 / n + V2 / r.
struct TheoreticalVariance {
  double v1;
  double v2;
  double total;
};

inline TheoreticalVariance mi_variance_theory(const BiasInputs& in) {
  TheoreticalVariance out{};
  out.v1 = in.var_g - (1.0 - in.p_resp) * in.cond_var_nonresp;
  const double full = in.mdot_marg.dot(in.info_inv * in.mdot_marg);
  const double resp = in.mdot1.dot(in.info_inv * in.mdot1);
  out.v2 = full - in.p_resp * in.p_resp * resp;
  const double n = static_cast<double>(in.n);
  out.total = out.v1 / n + out.v2 / (in.p_resp * n);
  return out;
}

/// Respondent-sample (size r = p n) variances of the method-of-moments and
/// maximum-likelihood complete-sample estimators, for the MCAR bias form.
inline double var_mme_respondents(const BiasInputs& in) {
  return in.var_g / (in.p_resp * static_cast<double>(in.n));
}

inline double var_mle_respondents(const BiasInputs& in) {
  const double info_term = in.mdot_marg.dot(in.info_inv * in.mdot_marg);
  return (in.var_cond_mean + info_term) / (in.p_resp * static_cast<double>(in.n));
}

/// Monte Carlo evaluation of the conditional moments in the bias formulas.
/// Covariates are drawn from the model; response-group expectations use the
/// exact response probabilities as weights, and var{g(Y)|X} is evaluated
/// analytically per draw (sigma^2 for the mean; Phi(z)(1-Phi(z)) for a
/// threshold proportion).
inline BiasInputs moment_oracle(const PopulationModel& model,
                                const MissingnessMechanism& mechanism,
                                const Estimand& estimand, std::int64_t draws,
                                RngStream& stream, Eigen::Index n_for_bias) {
  model.validate();
  if (draws < 1) throw std::invalid_argument("moment_oracle: draws must be >= 1");
  const Eigen::Index p = model.design_dim();
  const Eigen::Index dim = p + 1;  // (beta, sigma^2)
  const double sigma2 = model.error_variance;
  const double sigma = std::sqrt(sigma2);
  const double q = estimand.is_proportion() ? estimand.threshold() : 0.0;

  double w1_sum = 0.0;
  double w0_sum = 0.0;
  Eigen::MatrixXd xx1 = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd mdot0 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd mdot1 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd mdot_marg = Eigen::VectorXd::Zero(dim);
  double m_sum = 0.0;
  double m2_sum = 0.0;
  double condvar_sum = 0.0;
  double condvar0_sum = 0.0;
  double x1_sum = 0.0;
  double x0_sum = 0.0;
  double xx1_raw_sum = 0.0;

  Eigen::VectorXd xtilde(p);
  Eigen::VectorXd mdot(dim);
  for (std::int64_t it = 0; it < draws; ++it) {
    const double xi = std::visit(
        [&stream](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Exponential>) {
            return stream.exponential(d.rate);
          } else {
            return stream.normal(d.mean, d.variance);
          }
        },
        model.covariate);
    if (model.intercept) {
      xtilde[0] = 1.0;
      xtilde[1] = xi;
    } else {
      xtilde[0] = xi;
    }
    const double w1 = response_probability(mechanism, xi);
    const double w0 = 1.0 - w1;

    const double mu = model.conditional_mean(xi);
    double m;
    double condvar;
    if (estimand.is_proportion()) {
      const double z = (q - mu) / sigma;
      const double cdf = normal_cdf(z);
      m = cdf;
      condvar = cdf * (1.0 - cdf);
      const double pdf = normal_pdf(z);
      mdot.head(p) = -(pdf / sigma) * xtilde;
      mdot[p] = -pdf * z / (2.0 * sigma2);
    } else {
      m = mu;
      condvar = sigma2;
      mdot.head(p) = xtilde;
      mdot[p] = 0.0;
    }

    w1_sum += w1;
    w0_sum += w0;
    xx1.noalias() += w1 * xtilde * xtilde.transpose();
    mdot0 += w0 * mdot;
    mdot1 += w1 * mdot;
    mdot_marg += mdot;
    m_sum += m;
    m2_sum += m * m;
    condvar_sum += condvar;
    condvar0_sum += w0 * condvar;
    x1_sum += w1 * xi;
    x0_sum += w0 * xi;
    xx1_raw_sum += w1 * xi * xi;
  }

  const double dn = static_cast<double>(draws);
  BiasInputs out;
  out.n = n_for_bias;
  out.p_resp = w1_sum / dn;
  out.sigma2 = sigma2;
  out.cond_var_nonresp = condvar0_sum / w0_sum;
  out.cond_var_marg = condvar_sum / dn;
  const double m_mean = m_sum / dn;
  out.var_cond_mean = m2_sum / dn - m_mean * m_mean;
  out.var_g = out.var_cond_mean + out.cond_var_marg;
  out.mdot0 = mdot0 / w0_sum;
  out.mdot1 = mdot1 / w1_sum;
  out.mdot_marg = mdot_marg / dn;
  out.e1x = x1_sum / w1_sum;
  out.e0x = x0_sum / w0_sum;
  out.e1x2 = xx1_raw_sum / w1_sum;

  // Fisher information of the normal linear model, block diagonal in
  // (beta, sigma^2) under the respondent covariate distribution.
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dim, dim);
  info.topLeftCorner(p, p) = (xx1 / w1_sum) / sigma2;
  info(p, p) = 1.0 / (2.0 * sigma2 * sigma2);
  out.info_inv = info.inverse();
  return out;
}

}  // namespace overmi
