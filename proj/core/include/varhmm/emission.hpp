#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "varhmm/spd_matrix.hpp"

namespace varhmm {

/// Per-mode VAR(r) emission: y_t = sum_i A_i y_{t-i} + e_t, e_t ~ N(0, Sigma).
///
/// Order 0 degenerates to a Gaussian with a fixed mean vector (zero unless a
/// mean is configured) and covariance Sigma.
class VarEmission {
 public:
  /// r >= 1 emission from coefficient matrices A_1..A_r (each d x d).
  VarEmission(std::vector<Eigen::MatrixXd> coeffs, SpdMatrix noise);
  /// r == 0 emission with an explicit mean.
  VarEmission(Eigen::VectorXd mean, SpdMatrix noise);
  /// r == 0 emission with zero mean.
  explicit VarEmission(SpdMatrix noise);

  int order() const { return order_; }
  int dim() const { return static_cast<int>(noise_.dim()); }
  const std::vector<Eigen::MatrixXd>& coeffs() const { return coeffs_; }
  /// Stacked [A_1 ... A_r], d x (d*r); empty for order 0.
  const Eigen::MatrixXd& stacked_coeffs() const { return stacked_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const SpdMatrix& noise() const { return noise_; }

  /// One-step prediction from the last r observations, most recent first.
  /// history may be longer than r; only the first r entries are used.
  Eigen::VectorXd predict(std::span<const Eigen::VectorXd> history) const;

  /// One-step prediction from the stacked lag vector [y_{t-1}; ...; y_{t-r}]
  /// (size d*r, empty for order 0).
  Eigen::VectorXd predict_stacked(const Eigen::Ref<const Eigen::VectorXd>& lag) const;

  /// log N(y | prediction, Sigma).
  double loglik(const Eigen::Ref<const Eigen::VectorXd>& y,
                std::span<const Eigen::VectorXd> history) const;
  double loglik_stacked(const Eigen::Ref<const Eigen::VectorXd>& y,
                        const Eigen::Ref<const Eigen::VectorXd>& lag) const;

 private:
  int order_ = 0;
  std::vector<Eigen::MatrixXd> coeffs_;
  Eigen::VectorXd mean_;  // order-0 mean
  SpdMatrix noise_;
  Eigen::MatrixXd stacked_;  // d x (d*order)
};

}  // namespace varhmm
