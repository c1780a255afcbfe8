#pragma once

#include <Eigen/Dense>

namespace varhmm {

/// Weak-limit sticky HDP state at truncation L: global weights beta, the
/// row-stochastic transition matrix pi and the concentration/stickiness
/// hyperparameters. rho = kappa / (alpha + kappa).
struct StickyHdpState {
  int truncation = 0;
  Eigen::VectorXd beta;  // length L, sums to 1
  Eigen::MatrixXd pi;    // L x L, rows sum to 1
  double alpha = 0.0;
  double gamma = 0.0;
  double kappa = 0.0;
  double rho = 0.0;
};

/// Checks simplex/row-stochastic invariants (1e-10) and the rho identity
/// (1e-12); throws InvalidParameterError on violation.
void validate(const StickyHdpState& state);

}  // namespace varhmm
