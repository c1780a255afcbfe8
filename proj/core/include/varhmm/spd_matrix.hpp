#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace varhmm {

/// Symmetric positive-definite matrix with a cached Cholesky factor.
///
/// Construction validates symmetry (1e-12 relative tolerance) and positive
/// definiteness via the factorization itself. If the first factorization
/// fails, a diagonal jitter of 1e-9 * trace/dim is added once; failure after
/// jitter raises InvalidParameterError.
class SpdMatrix {
 public:
  explicit SpdMatrix(Eigen::MatrixXd m);

  static SpdMatrix identity(Eigen::Index dim);
  /// scale * I.
  static SpdMatrix scaled_identity(Eigen::Index dim, double scale);

  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
  /// log |M|, from the Cholesky diagonal.
  double log_det() const { return log_det_; }

 private:
  Eigen::MatrixXd m_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
};

}  // namespace varhmm
