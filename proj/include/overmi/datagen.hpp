#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

#include "overmi/estimators.hpp"
#include "overmi/quadrature.hpp"
#include "overmi/rng.hpp"
#include "overmi/special.hpp"

namespace overmi {

using CovariateDist = std::variant<Exponential, Normal>;

/// Superpopulation regression model y = x' beta + e, e ~ N(0, error_variance),
/// with a single scalar covariate and an optional intercept column.
struct PopulationModel {
  bool intercept = false;
  Eigen::VectorXd beta;  // length intercept + 1, ordered (1, x)
  CovariateDist covariate = Exponential{1.0};
  double error_variance = 1.0;

  Eigen::Index design_dim() const { return intercept ? 2 : 1; }

  void validate() const {
    if (!(error_variance > 0.0)) {
      throw std::invalid_argument("PopulationModel: error_variance must be > 0");
    }
    if (beta.size() != design_dim()) {
      throw std::invalid_argument(
          "PopulationModel: beta length must match intercept + 1 covariate");
    }
    std::visit(
        [](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Exponential>) {
            if (!(d.rate > 0.0)) {
              throw std::invalid_argument(
                  "PopulationModel: exponential covariate needs rate > 0");
            }
          } else {
            if (!(d.variance >= 0.0)) {
              throw std::invalid_argument(
                  "PopulationModel: normal covariate needs variance >= 0");
            }
          }
        },
        covariate);
  }

  double covariate_mean() const {
    return std::visit(
        [](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Exponential>) return 1.0 / d.rate;
          else return d.mean;
        },
        covariate);
  }

  double covariate_variance() const {
    return std::visit(
        [](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Exponential>) {
            return 1.0 / (d.rate * d.rate);
          } else {
            return d.variance;
          }
        },
        covariate);
  }

  double slope() const { return beta[design_dim() - 1]; }
  double intercept_term() const { return intercept ? beta[0] : 0.0; }

  double conditional_mean(double x) const {
    return intercept_term() + slope() * x;
  }
};

struct Mcar {
  double response_rate;
};

struct MarLogistic {
  double phi0;
  double phi1;
};

using MissingnessMechanism = std::variant<Mcar, MarLogistic>;

inline double response_probability(const MissingnessMechanism& mechanism,
                                   double x) {
  return std::visit(
      [x](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Mcar>) {
          return m.response_rate;
        } else {
          return 1.0 / (1.0 + std::exp(-m.phi0 - m.phi1 * x));
        }
      },
      mechanism);
}

inline void validate(const MissingnessMechanism& mechanism) {
  if (const auto* mcar = std::get_if<Mcar>(&mechanism)) {
    if (!(mcar->response_rate > 0.0 && mcar->response_rate <= 1.0)) {
      throw std::invalid_argument("Mcar: response_rate must lie in (0,1]");
    }
  }
}

struct CompleteSample {
  Eigen::MatrixXd x;  // n x p design, intercept column first when present
  Eigen::VectorXd y;
};

/// Incomplete dataset stored respondents-first: units 0..r-1 carry observed
/// outcomes, units r..n-1 have y masked to NaN and must never be read.
struct IncompleteDataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::uint8_t> delta;
  Eigen::Index r = 0;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
};

inline CompleteSample generate_sample(const PopulationModel& model,
                                      Eigen::Index n, RngStream& stream) {
  model.validate();
  if (n < 1) throw std::invalid_argument("generate_sample: n must be >= 1");
  const Eigen::Index p = model.design_dim();
  CompleteSample sample;
  sample.x.resize(n, p);
  sample.y.resize(n);
  const double sigma = std::sqrt(model.error_variance);
  for (Eigen::Index i = 0; i < n; ++i) {
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
      sample.x(i, 0) = 1.0;
      sample.x(i, 1) = xi;
    } else {
      sample.x(i, 0) = xi;
    }
    sample.y[i] = model.conditional_mean(xi) + sigma * stream.standard_normal();
  }
  return sample;
}

/// Draws response indicators and permutes respondents to the front (stable,
/// so the joint empirical distribution of (x, y, delta) is unchanged).
inline IncompleteDataset apply_missingness(
    const CompleteSample& sample, const MissingnessMechanism& mechanism,
    RngStream& stream) {
  validate(mechanism);
  const Eigen::Index n = sample.x.rows();
  const Eigen::Index p = sample.x.cols();
  std::vector<std::uint8_t> delta(static_cast<std::size_t>(n));
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = sample.x(i, p - 1);
    delta[static_cast<std::size_t>(i)] =
        stream.bernoulli(response_probability(mechanism, xi)) ? 1 : 0;
    r += delta[static_cast<std::size_t>(i)];
  }

  IncompleteDataset data;
  data.x.resize(n, p);
  data.y.resize(n);
  data.delta.resize(static_cast<std::size_t>(n));
  data.r = r;
  Eigen::Index front = 0;
  Eigen::Index back = r;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool observed = delta[static_cast<std::size_t>(i)] != 0;
    const Eigen::Index dst = observed ? front++ : back++;
    data.x.row(dst) = sample.x.row(i);
    data.y[dst] = observed ? sample.y[i]
                           : std::numeric_limits<double>::quiet_NaN();
    data.delta[static_cast<std::size_t>(dst)] = observed ? 1 : 0;
  }
  return data;
}

/// Exact superpopulation value of the estimand; closed form where available,
/// otherwise adaptive quadrature over the covariate distribution.
inline double true_eta(const PopulationModel& model, const Estimand& estimand) {
  model.validate();
  if (!estimand.is_proportion()) {
    return model.intercept_term() + model.slope() * model.covariate_mean();
  }
  const double q = estimand.threshold();
  const double sigma = std::sqrt(model.error_variance);
  const double b = model.slope();
  const double c = model.intercept_term();
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Normal>) {
          // Y is marginally normal: mean c + b*mu, variance b^2 v + sigma^2.
          const double mu = c + b * d.mean;
          const double var = b * b * d.variance + sigma * sigma;
          if (var <= 0.0) return q > mu ? 1.0 : 0.0;
          return normal_cdf((q - mu) / std::sqrt(var));
        } else {
          if (b == 0.0) return normal_cdf((q - c) / sigma);
          const double hi = 45.0 / d.rate;  // exp tail below 1e-19
          const auto integrand = [&](double x) {
            return normal_cdf((q - c - b * x) / sigma) * d.rate *
                   std::exp(-d.rate * x);
          };
          return adaptive_simpson(integrand, 0.0, hi, 1e-12);
        }
      },
      model.covariate);
}

}  // namespace overmi
