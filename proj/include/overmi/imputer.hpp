#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "overmi/datagen.hpp"
#include "overmi/errors.hpp"
#include "overmi/rng.hpp"

namespace overmi {

/// Fitted normal linear regression posterior on the respondents under the
/// noninformative prior proportional to 1/sigma^2.
struct PosteriorSpec {
  Eigen::VectorXd beta_hat;
  Eigen::MatrixXd xtx_inv;  // (X_r' X_r)^-1
  double sigma2_hat = 0.0;  // RSS / (r - p)
  Eigen::Index resid_df = 0;
};

struct ParameterDraw {
  Eigen::VectorXd beta_star;
  double sigma2_star = 0.0;
};

/// One imputed dataset: y_completed keeps observed outcomes and fills the
/// rest, y_over holds a fresh model draw for every unit. Nonrespondents reuse
/// the same draw in both roles.
struct CompletedReplicate {
  int index = 0;
  Eigen::VectorXd y_completed;
  Eigen::VectorXd y_over;
  ParameterDraw draw;
};

inline PosteriorSpec fit_posterior(const IncompleteDataset& data) {
  const Eigen::Index r = data.r;
  const Eigen::Index p = data.p();
  if (r <= p) {
    throw InsufficientRespondentsError(
        "fit_posterior: needs more respondents than design columns");
  }
  const Eigen::MatrixXd xr = data.x.topRows(r);
  const Eigen::VectorXd yr = data.y.head(r);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(xr);
  const Eigen::MatrixXd rfac =
      qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();

  // R shares singular values with X_r; gate on cond(X'X) = cond(X)^2.
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(rfac);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(p - 1);
  if (!(smin > 0.0) || (smax / smin) * (smax / smin) > 1e12) {
    throw RankDeficientError("fit_posterior: respondent design is singular");
  }

  PosteriorSpec post;
  post.beta_hat = qr.solve(yr);
  const Eigen::MatrixXd rinv =
      rfac.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  post.xtx_inv = rinv * rinv.transpose();
  post.xtx_inv = 0.5 * (post.xtx_inv + post.xtx_inv.transpose()).eval();
  post.resid_df = r - p;
  const double rss = (yr - xr * post.beta_hat).squaredNorm();
  post.sigma2_hat = rss / static_cast<double>(post.resid_df);
  if (!(post.sigma2_hat > 0.0)) {
    throw InsufficientRespondentsError(
        "fit_posterior: zero residual sum of squares, posterior is improper");
  }
  return post;
}

/// sigma2* = sigma2_hat * df / chisq(df), beta* ~ N(beta_hat, sigma2* xtx_inv):
/// the exact posterior draw under the 1/sigma^2 prior.
inline ParameterDraw draw_parameters(const PosteriorSpec& post,
                                     RngStream& stream) {
  ParameterDraw draw;
  draw.sigma2_star = post.sigma2_hat * static_cast<double>(post.resid_df) /
                     stream.chi_square(static_cast<double>(post.resid_df));
  const Eigen::Index p = post.beta_hat.size();
  const Eigen::MatrixXd chol =
      Eigen::LLT<Eigen::MatrixXd>(post.xtx_inv).matrixL();
  Eigen::VectorXd z(p);
  for (Eigen::Index k = 0; k < p; ++k) z[k] = stream.standard_normal();
  draw.beta_star = post.beta_hat + std::sqrt(draw.sigma2_star) * (chol * z);
  return draw;
}

/// Imputes every unit (over-imputation): one draw per unit serves both as
/// the nonrespondent's completed value and as the over-imputed value.
inline CompletedReplicate make_replicate(const IncompleteDataset& data,
                                         const ParameterDraw& draw, int index,
                                         RngStream& stream) {
  const Eigen::Index n = data.n();
  CompletedReplicate rep;
  rep.index = index;
  rep.draw = draw;
  rep.y_completed.resize(n);
  rep.y_over.resize(n);
  const double sigma_star = std::sqrt(draw.sigma2_star);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = data.x.row(i).dot(draw.beta_star);
    const double value = mean + sigma_star * stream.standard_normal();
    rep.y_over[i] = value;
    rep.y_completed[i] = (i < data.r) ? data.y[i] : value;
  }
  return rep;
}

}  // namespace overmi
