#include "varhmm/emission.hpp"

#include <cmath>
#include <string>

#include "varhmm/distributions.hpp"
#include "varhmm/errors.hpp"

namespace varhmm {

VarEmission::VarEmission(std::vector<Eigen::MatrixXd> coeffs, SpdMatrix noise)
    : order_(static_cast<int>(coeffs.size())),
      coeffs_(std::move(coeffs)),
      mean_(Eigen::VectorXd::Zero(noise.dim())),
      noise_(std::move(noise)) {
  const Eigen::Index d = noise_.dim();
  for (const auto& a : coeffs_) {
    if (a.rows() != d || a.cols() != d) {
      throw ShapeError("VAR coefficient matrix must be " + std::to_string(d) + "x" +
                       std::to_string(d));
    }
    if (!a.allFinite()) {
      throw InvalidParameterError("VAR coefficient matrix has non-finite entries");
    }
  }
  stacked_.resize(d, d * order_);
  for (int i = 0; i < order_; ++i) {
    stacked_.middleCols(i * d, d) = coeffs_[static_cast<std::size_t>(i)];
  }
}

VarEmission::VarEmission(Eigen::VectorXd mean, SpdMatrix noise)
    : mean_(std::move(mean)), noise_(std::move(noise)), stacked_(noise_.dim(), 0) {
  if (mean_.size() != noise_.dim()) {
    throw ShapeError("order-0 mean must match the noise dimension");
  }
  if (!mean_.allFinite()) {
    throw InvalidParameterError("order-0 mean has non-finite entries");
  }
}

VarEmission::VarEmission(SpdMatrix noise)
    : mean_(Eigen::VectorXd::Zero(noise.dim())),
      noise_(std::move(noise)),
      stacked_(noise_.dim(), 0) {}

Eigen::VectorXd VarEmission::predict(std::span<const Eigen::VectorXd> history) const {
  if (order_ == 0) {
    return mean_;
  }
  if (static_cast<int>(history.size()) < order_) {
    throw InsufficientHistoryError("VAR(" + std::to_string(order_) + ") prediction needs " +
                                   std::to_string(order_) + " past frames, got " +
                                   std::to_string(history.size()));
  }
  const Eigen::Index d = noise_.dim();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < order_; ++i) {
    const Eigen::VectorXd& h = history[static_cast<std::size_t>(i)];
    if (h.size() != d) {
      throw ShapeError("history frame dimension mismatch");
    }
    out.noalias() += coeffs_[static_cast<std::size_t>(i)] * h;
  }
  return out;
}

Eigen::VectorXd VarEmission::predict_stacked(const Eigen::Ref<const Eigen::VectorXd>& lag) const {
  if (order_ == 0) {
    return mean_;
  }
  if (lag.size() != stacked_.cols()) {
    throw InsufficientHistoryError("stacked lag vector must have size " +
                                   std::to_string(stacked_.cols()) + ", got " +
                                   std::to_string(lag.size()));
  }
  return stacked_ * lag;
}

double VarEmission::loglik(const Eigen::Ref<const Eigen::VectorXd>& y,
                           std::span<const Eigen::VectorXd> history) const {
  return mvn_logpdf(y, predict(history), noise_);
}

double VarEmission::loglik_stacked(const Eigen::Ref<const Eigen::VectorXd>& y,
                                   const Eigen::Ref<const Eigen::VectorXd>& lag) const {
  return mvn_logpdf(y, predict_stacked(lag), noise_);
}

}  // namespace varhmm
