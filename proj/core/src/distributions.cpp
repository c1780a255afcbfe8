#include "varhmm/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "varhmm/errors.hpp"

namespace varhmm {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void require_positive_finite(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw InvalidParameterError(std::string(name) + " must be positive and finite, got " +
                                std::to_string(v));
  }
}

double sample_chi_squared(double dof, RngStream& rng) {
  std::gamma_distribution<double> d(dof / 2.0, 2.0);
  return d(rng);
}

}  // namespace

double sample_gamma(double shape, double rate, RngStream& rng) {
  require_positive_finite(shape, "gamma shape");
  require_positive_finite(rate, "gamma rate");
  std::gamma_distribution<double> d(shape, 1.0 / rate);
  return d(rng);
}

double sample_beta(double a, double b, RngStream& rng) {
  require_positive_finite(a, "beta parameter a");
  require_positive_finite(b, "beta parameter b");
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  double v = (x + y > 0.0) ? x / (x + y) : 0.5;
  // Keep the draw in the open interval; downstream code takes log(v) and
  // log(1-v).
  const double lo = std::numeric_limits<double>::min();
  const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return std::clamp(v, lo, hi);
}

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, RngStream& rng) {
  if (alpha.size() < 1) {
    throw InvalidParameterError("dirichlet needs at least one concentration entry");
  }
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (!std::isfinite(alpha[i]) || alpha[i] <= 0.0) {
      throw InvalidParameterError("dirichlet concentration entry " + std::to_string(i) +
                                  " must be positive and finite, got " + std::to_string(alpha[i]));
    }
  }
  // Draws are normalized in the log domain: small concentrations (which
  // hyperparameter resampling can visit) would otherwise underflow the whole
  // gamma vector. For shape < 0.2 the boosting identity
  // Gamma(a) = Gamma(a+1) * U^(1/a) keeps the log-draw finite.
  const double tiny = std::numeric_limits<double>::min();
  Eigen::VectorXd lg(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (alpha[i] < 0.2) {
      std::gamma_distribution<double> d(alpha[i] + 1.0, 1.0);
      const double y = std::max(d(rng), tiny);
      const double u = std::max(rng.uniform(), tiny);
      lg[i] = std::log(y) + std::log(u) / alpha[i];
    } else {
      std::gamma_distribution<double> d(alpha[i], 1.0);
      lg[i] = std::log(std::max(d(rng), tiny));
    }
  }
  const double m = lg.maxCoeff();
  if (!std::isfinite(m)) {
    throw NumericalError("dirichlet draw underflowed; concentrations too small");
  }
  const Eigen::VectorXd w = (lg.array() - m).exp().matrix();
  return w / w.sum();
}

Eigen::VectorXd sample_stick_breaking(double gamma, int truncation, RngStream& rng) {
  require_positive_finite(gamma, "stick-breaking concentration");
  if (truncation < 1) {
    throw InvalidParameterError("stick-breaking truncation must be >= 1, got " +
                                std::to_string(truncation));
  }
  Eigen::VectorXd beta(truncation);
  double remaining = 1.0;
  for (int k = 0; k + 1 < truncation; ++k) {
    const double nu = sample_beta(1.0, gamma, rng);
    beta[k] = nu * remaining;
    remaining *= (1.0 - nu);
  }
  beta[truncation - 1] = std::max(0.0, 1.0 - beta.head(truncation - 1).sum());
  return beta;
}

Eigen::MatrixXd sample_matrix_normal(const Eigen::MatrixXd& mean, const SpdMatrix& row_cov,
                                     const SpdMatrix& col_precision, RngStream& rng) {
  const Eigen::Index d = mean.rows();
  const Eigen::Index m = mean.cols();
  if (row_cov.dim() != d || col_precision.dim() != m) {
    throw ShapeError("matrix-normal dimensions do not conform: mean " + std::to_string(d) + "x" +
                     std::to_string(m) + ", row covariance " + std::to_string(row_cov.dim()) +
                     ", column parameter " + std::to_string(col_precision.dim()));
  }
  Eigen::MatrixXd z(d, m);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      z(i, j) = n(rng);
    }
  }
  // X = M + chol(Sigma) Z chol(K)^{-1}: column covariance K^{-1}.
  const Eigen::MatrixXd left = row_cov.llt().matrixL() * z;
  return mean + col_precision.llt().matrixU().solve(left.transpose()).transpose();
}

SpdMatrix sample_inverse_wishart(double dof, const SpdMatrix& scale, RngStream& rng) {
  const Eigen::Index d = scale.dim();
  if (!std::isfinite(dof) || dof <= static_cast<double>(d) - 1.0) {
    throw InvalidParameterError("inverse-Wishart dof must exceed dim - 1 = " +
                                std::to_string(d - 1) + ", got " + std::to_string(dof));
  }
  // Bartlett factor of W ~ Wishart(dof, I).
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    a(i, i) = std::sqrt(sample_chi_squared(dof - static_cast<double>(i), rng));
    for (Eigen::Index j = 0; j < i; ++j) {
      a(i, j) = n(rng);
    }
  }
  // Sigma = L0 (A A^T)^{-1} L0^T with S0 = L0 L0^T.
  const Eigen::MatrixXd l0t = scale.llt().matrixL().transpose();
  const Eigen::MatrixXd x = a.triangularView<Eigen::Lower>().solve(l0t);
  Eigen::MatrixXd sigma = x.transpose() * x;
  return SpdMatrix((sigma + sigma.transpose()) / 2.0);
}

double mvn_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mean, const SpdMatrix& sigma) {
  const Eigen::Index d = sigma.dim();
  if (y.size() != d || mean.size() != d) {
    throw ShapeError("mvn_logpdf dimensions do not conform");
  }
  const Eigen::VectorXd w = sigma.llt().matrixL().solve(y - mean);
  return -0.5 * (static_cast<double>(d) * std::log(kTwoPi) + sigma.log_det() + w.squaredNorm());
}

int sample_categorical_from_log(const Eigen::VectorXd& log_weights, RngStream& rng) {
  if (log_weights.size() < 1) {
    throw InvalidParameterError("categorical draw needs at least one weight");
  }
  const double m = log_weights.maxCoeff();
  if (!std::isfinite(m)) {
    throw NumericalError("categorical log-weights are all -inf or contain NaN");
  }
  return sample_categorical((log_weights.array() - m).exp().matrix(), rng);
}

int sample_categorical(const Eigen::VectorXd& weights, RngStream& rng) {
  const double total = weights.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("categorical weights must have a positive finite sum");
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) {
      return static_cast<int>(i);
    }
  }
  return static_cast<int>(weights.size() - 1);
}

int sample_crt(int customers, double concentration, RngStream& rng) {
  if (customers < 0) {
    throw InvalidParameterError("CRT customer count must be nonnegative");
  }
  if (customers == 0) {
    return 0;
  }
  require_positive_finite(concentration, "CRT concentration");
  int tables = 0;
  for (int i = 0; i < customers; ++i) {
    const double p_new = concentration / (concentration + static_cast<double>(i));
    if (rng.uniform() < p_new) {
      ++tables;
    }
  }
  return tables;
}

int sample_binomial(int trials, double p, RngStream& rng) {
  if (trials < 0 || !std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw InvalidParameterError("binomial needs trials >= 0 and p in [0, 1]");
  }
  if (trials == 0 || p == 0.0) {
    return 0;
  }
  std::binomial_distribution<int> d(trials, p);
  return d(rng);
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) {
    return m;  // all -inf stays -inf
  }
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace varhmm
