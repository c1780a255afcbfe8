#pragma once

#include <Eigen/Dense>

#include "varhmm/rng.hpp"
#include "varhmm/spd_matrix.hpp"

namespace varhmm {

/// Gamma draw in the shape-rate parameterization (mean shape/rate).
double sample_gamma(double shape, double rate, RngStream& rng);

/// Beta(a, b) draw, clamped into the open interval (0, 1).
double sample_beta(double a, double b, RngStream& rng);

/// Dirichlet draw; the result is nonnegative and sums to 1 within 1e-12.
Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& alpha, RngStream& rng);

/// Truncated stick-breaking weights: nu_k ~ Beta(1, gamma) for k < L and the
/// final entry closes the stick, so the vector sums to 1.
Eigen::VectorXd sample_stick_breaking(double gamma, int truncation, RngStream& rng);

/// Matrix-normal draw X ~ MN(mean, row_cov, col_precision): row_cov is the
/// covariance among rows and col_precision acts on the column side through
/// its inverse, i.e. Cov(vec X) = col_precision^{-1} (kron) row_cov.
Eigen::MatrixXd sample_matrix_normal(const Eigen::MatrixXd& mean, const SpdMatrix& row_cov,
                                     const SpdMatrix& col_precision, RngStream& rng);

/// Inverse-Wishart draw with `dof` degrees of freedom and scale matrix
/// `scale`; Monte Carlo mean is scale / (dof - dim - 1) when that is finite.
/// Requires dof > dim - 1 (proper density).
SpdMatrix sample_inverse_wishart(double dof, const SpdMatrix& scale, RngStream& rng);

/// Multivariate normal log-density, evaluated through the cached Cholesky
/// factor of sigma (no explicit inverse).
double mvn_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mean, const SpdMatrix& sigma);

/// Draw an index from unnormalized log-weights.
int sample_categorical_from_log(const Eigen::VectorXd& log_weights, RngStream& rng);

/// Draw an index from nonnegative (not necessarily normalized) weights.
int sample_categorical(const Eigen::VectorXd& weights, RngStream& rng);

/// Chinese-restaurant table count: number of tables occupied by `customers`
/// sequential arrivals under concentration `concentration`.
int sample_crt(int customers, double concentration, RngStream& rng);

int sample_binomial(int trials, double p, RngStream& rng);

/// log(sum(exp(v))) without overflow.
double log_sum_exp(const Eigen::VectorXd& v);

}  // namespace varhmm
