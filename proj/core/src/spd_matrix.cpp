#include "varhmm/spd_matrix.hpp"

#include <cmath>
#include <string>

#include "varhmm/errors.hpp"

namespace varhmm {

SpdMatrix::SpdMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw ShapeError("SpdMatrix requires a non-empty square matrix, got " +
                     std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
  }
  if (!m_.allFinite()) {
    throw InvalidParameterError("SpdMatrix entries must be finite");
  }
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw InvalidParameterError("SpdMatrix input is not symmetric (max asymmetry " +
                                std::to_string(asym) + ")");
  }
  m_ = ((m_ + m_.transpose()) / 2.0).eval();

  llt_.compute(m_);
  if (llt_.info() != Eigen::Success) {
    const double jitter = 1e-9 * m_.trace() / static_cast<double>(m_.rows());
    if (jitter > 0.0) {
      m_.diagonal().array() += jitter;
      llt_.compute(m_);
    }
    if (llt_.info() != Eigen::Success) {
      throw InvalidParameterError("SpdMatrix input is not positive definite (after jitter)");
    }
  }
  log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  if (!std::isfinite(log_det_)) {
    throw InvalidParameterError("SpdMatrix is numerically singular");
  }
}

SpdMatrix SpdMatrix::identity(Eigen::Index dim) {
  return SpdMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

SpdMatrix SpdMatrix::scaled_identity(Eigen::Index dim, double scale) {
  return SpdMatrix(scale * Eigen::MatrixXd::Identity(dim, dim));
}

}  // namespace varhmm
