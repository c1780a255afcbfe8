#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "varhmm/model.hpp"
#include "varhmm/rng.hpp"
#include "varhmm/sequence.hpp"

namespace varhmm {

/// Shape-rate Gamma prior (mean shape/rate).
struct GammaPrior {
  double shape = 1.0;
  double rate = 0.01;
};

/// Beta prior on the self-transition proportion rho = kappa / (alpha+kappa).
struct BetaPrior {
  double a = 10.0;
  double b = 1.0;
};

/// Weak-limit blocked Gibbs configuration. Defaults follow the conservative
/// setting: truncation 20, 500 sweeps, M = 0, K = 10*I, nu0 = obs_dim + 2,
/// S0 = 0.75 * pooled empirical covariance, Gamma(1, 0.01) on alpha+kappa
/// and gamma, Beta(10, 1) on rho.
struct GibbsConfig {
  int order = 1;  // emission order r
  int truncation = 20;
  int max_iters = 500;
  int burn_in = 250;
  /// The returned point estimate is the highest joint-log-likelihood sweep
  /// within the final window (an approximate-MAP sample; cross-sweep
  /// averaging is ill-posed under label switching).
  int point_estimate_window = 50;

  double mniw_k_scale = 10.0;
  std::optional<Eigen::MatrixXd> mniw_M;  // d x m override
  std::optional<Eigen::MatrixXd> mniw_K;  // m x m override
  double iw_dof_offset = 2.0;             // nu0 = obs_dim + offset
  double iw_scale_factor = 0.75;
  std::optional<Eigen::MatrixXd> iw_scale;  // explicit S0 override

  GammaPrior gamma_prior{1.0, 0.01};
  GammaPrior alpha_kappa_prior{1.0, 0.01};
  BetaPrior rho_prior{10.0, 1.0};
  bool resample_hypers = true;
  int hyper_inner_iters = 5;

  /// Order-0 emissions regress on a constant, giving each mode a Gaussian
  /// mean with a normal-inverse-Wishart prior (the sHDP-HMM baseline).
  bool fit_mean_for_order0 = true;
  /// Initial state distribution: global weights beta unless set to uniform.
  bool uniform_initial_distribution = false;
};

void validate(const GibbsConfig& config);

struct GibbsDiagnostics {
  std::vector<double> joint_loglik;  // marginal data log-likelihood per sweep
  std::vector<int> active_modes;     // modes with >= 1 assigned frame
  std::vector<double> alpha_trace, gamma_trace, kappa_trace, rho_trace;
  int hyper_resamples = 0;
  int point_estimate_iter = -1;  // 1-based sweep the returned model came from
};

/// Resolved matrix-normal inverse-Wishart prior for one emission family.
struct MniwPrior {
  Eigen::MatrixXd M;  // d x m
  Eigen::MatrixXd K;  // m x m (column-side parameter; 0x0 when m == 0)
  double nu0 = 0.0;
  SpdMatrix S0;
};

/// iw_scale_factor times the pooled empirical covariance of all frames.
SpdMatrix empirical_iw_scale(const std::vector<ObservationSequence>& dataset,
                             double scale_factor);

MniwPrior resolve_mniw_prior(const GibbsConfig& config,
                             const std::vector<ObservationSequence>& dataset, int obs_dim);

/// Joint draw of the state path z_{r+1:T} from its conditional posterior via
/// backward message passing and forward sampling, in the log domain.
std::vector<int> sample_state_sequence(const ShdpVarModel& model, const ObservationSequence& seq,
                                       RngStream& rng);

/// Conjugate MNIW posterior draw of every mode's (A, Sigma) given the state
/// assignments (one vector of length T_i - r per sequence). Modes with no
/// assigned frames draw from the prior.
std::vector<VarEmission> update_emissions(const std::vector<ObservationSequence>& dataset,
                                          const std::vector<std::vector<int>>& assignments,
                                          const GibbsConfig& config, RngStream& rng);

/// Weak-limit sticky posterior rows: pi_j ~ Dir(alpha*beta + kappa*e_j + n_j).
Eigen::MatrixXd update_transitions(const Eigen::MatrixXd& counts, const Eigen::VectorXd& beta,
                                   double alpha, double kappa, RngStream& rng);

struct TableCounts {
  Eigen::MatrixXd tables;     // m_jk from the Chinese-restaurant construction
  Eigen::MatrixXd corrected;  // m_jk with sticky overrides removed on the diagonal
  Eigen::VectorXd overrides;  // override counts w_j
};

/// Auxiliary table counts for the HDP update: CRT draws with concentration
/// alpha*beta_k + kappa*delta_jk, then the sticky override correction.
TableCounts sample_table_counts(const Eigen::MatrixXd& counts, const Eigen::VectorXd& beta,
                                double alpha, double kappa, double rho, RngStream& rng);

/// beta ~ Dirichlet(gamma/L + dish_counts_1, ..., gamma/L + dish_counts_L).
Eigen::VectorXd update_global_beta(const Eigen::VectorXd& dish_counts, double gamma_conc,
                                   RngStream& rng);

struct HyperStats {
  Eigen::VectorXd customers_per_row;  // transitions out of each row
  double total_tables = 0.0;          // raw table count m_..
  double total_overrides = 0.0;       // w_.
  Eigen::VectorXd dish_counts;        // top-level draws hitting beta, per mode
};

struct HyperSample {
  double alpha_plus_kappa = 0.0;
  double gamma = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  double kappa = 0.0;
};

/// Auxiliary-variable resampling of (alpha+kappa) and gamma plus the
/// conjugate Beta update of rho; (alpha, kappa) recovered from the pair.
HyperSample resample_hyperparameters(const HyperStats& stats, const GammaPrior& alpha_kappa_prior,
                                     const GammaPrior& gamma_prior, const BetaPrior& rho_prior,
                                     double alpha_plus_kappa, double gamma_conc, int inner_iters,
                                     RngStream& rng);

/// Draw a full model from the weak-limit generative prior. Requires an
/// explicit iw_scale in the config (there is no data to pool).
ShdpVarModel sample_prior_model(const GibbsConfig& config, int obs_dim, RngStream& rng);

/// The sweep engine behind fit(). Exposed so joint-distribution tests
/// (Geweke-style) can alternate sweeps with data regeneration.
class GibbsSampler {
 public:
  GibbsSampler(std::vector<ObservationSequence> dataset, const GibbsConfig& config, RngStream rng);

  /// Random uniform state assignments, then parameters from their
  /// conditionals. Called by fit(); optional before set_state().
  void initialize();

  /// Adopt externally drawn parameters (states are resampled next sweep).
  void set_state(const ShdpVarModel& model);

  /// Swap in regenerated data of identical shape (joint-distribution tests).
  void set_data(std::vector<ObservationSequence> dataset);

  /// One full blocked sweep: states, auxiliary tables, hyperparameters,
  /// beta, pi, emissions.
  void sweep();

  ShdpVarModel model() const;
  double data_loglik() const;
  int active_modes() const;
  const std::vector<std::vector<int>>& assignments() const { return z_; }
  double alpha() const { return alpha_; }
  double gamma_conc() const { return gamma_; }
  double kappa() const { return kappa_; }
  double rho() const { return rho_; }
  int sweeps_done() const { return sweeps_; }
  bool hypers_resampled_last_sweep() const { return hypers_resampled_; }

 private:
  void rebuild_designs();
  Eigen::MatrixXd loglik_table(std::size_t seq_index) const;
  Eigen::VectorXd initial_distribution() const;

  GibbsConfig config_;
  RngStream rng_;
  std::vector<ObservationSequence> dataset_;
  std::vector<Eigen::MatrixXd> lag_t_;     // per sequence: m x (T-r)
  std::vector<Eigen::MatrixXd> target_t_;  // per sequence: d x (T-r)
  MniwPrior prior_;
  int obs_dim_ = 0;
  int design_dim_ = 0;

  std::vector<std::vector<int>> z_;
  Eigen::VectorXd beta_;
  Eigen::MatrixXd pi_;
  std::vector<VarEmission> emissions_;
  double alpha_ = 0.0, gamma_ = 0.0, kappa_ = 0.0, rho_ = 0.0;
  int sweeps_ = 0;
  bool hypers_resampled_ = false;
};

struct FitResult {
  ShdpVarModel model;
  GibbsDiagnostics diagnostics;
};

/// Runs max_iters full sweeps on the sequences of one skill and returns the
/// point-estimate model plus the diagnostics trace. The stream is taken by
/// value: a fit is a deterministic function of (dataset, config, stream).
FitResult fit(const std::vector<ObservationSequence>& dataset, const GibbsConfig& config,
              RngStream rng);

}  // namespace varhmm
