#include "varhmm/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "varhmm/distributions.hpp"
#include "varhmm/errors.hpp"

namespace varhmm {
namespace {

constexpr double kProbFloor = 1e-300;
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

int design_dim(const GibbsConfig& config, int obs_dim) {
  if (config.order > 0) {
    return obs_dim * config.order;
  }
  return config.fit_mean_for_order0 ? 1 : 0;
}

int checked_obs_dim(const std::vector<ObservationSequence>& dataset, const GibbsConfig& config) {
  validate(config);
  if (dataset.empty()) {
    throw InsufficientDataError("at least one training sequence is required");
  }
  const Eigen::Index d = dataset.front().dim();
  for (const auto& seq : dataset) {
    validate(seq);
    if (seq.dim() != d) {
      throw ShapeError("all sequences must share the observation dimension");
    }
    if (seq.frames() <= config.order) {
      throw InsufficientHistoryError("sequence '" + seq.trial_id + "' has " +
                                     std::to_string(seq.frames()) +
                                     " frames; need more than the order " +
                                     std::to_string(config.order));
    }
  }
  return static_cast<int>(d);
}

// Transposed design matrices: lag columns [y_{t-1}; ...; y_{t-r}] (or a
// constant 1 for the order-0 mean regression) and target columns y_t, both
// over the scored frames.
void build_design(const ObservationSequence& seq, int order, int m, Eigen::MatrixXd& lag_t,
                  Eigen::MatrixXd& target_t) {
  const Eigen::Index d = seq.dim();
  const Eigen::Index scored = seq.frames() - order;
  target_t.resize(d, scored);
  lag_t.resize(m, scored);
  for (Eigen::Index t = 0; t < scored; ++t) {
    target_t.col(t) = seq.data.row(order + t).transpose();
    if (order > 0) {
      for (int i = 0; i < order; ++i) {
        lag_t.col(t).segment(static_cast<Eigen::Index>(i) * d, d) =
            seq.data.row(order + t - 1 - i).transpose();
      }
    } else if (m == 1) {
      lag_t(0, t) = 1.0;
    }
  }
}

struct ModeStats {
  Eigen::MatrixXd sxx, syx, syy;
  double n = 0.0;

  ModeStats(Eigen::Index d, Eigen::Index m)
      : sxx(Eigen::MatrixXd::Zero(m, m)),
        syx(Eigen::MatrixXd::Zero(d, m)),
        syy(Eigen::MatrixXd::Zero(d, d)) {}
};

// One MNIW conjugate posterior draw; with zero counts this is a prior draw.
VarEmission draw_mniw(const ModeStats& stats, const MniwPrior& prior, int order, RngStream& rng) {
  const Eigen::Index m = prior.M.cols();
  if (m == 0) {
    Eigen::MatrixXd s_post = prior.S0.matrix() + stats.syy;
    SpdMatrix sigma =
        sample_inverse_wishart(prior.nu0 + stats.n, SpdMatrix((s_post + s_post.transpose()) / 2.0), rng);
    return VarEmission(std::move(sigma));
  }
  Eigen::MatrixXd sxx_post = prior.K + stats.sxx;
  const Eigen::MatrixXd mk = prior.M * prior.K;
  const Eigen::MatrixXd syx_post = mk + stats.syx;
  const Eigen::MatrixXd syy_post = mk * prior.M.transpose() + stats.syy;

  SpdMatrix sxx_spd((sxx_post + sxx_post.transpose()) / 2.0);
  const Eigen::MatrixXd a_mean = sxx_spd.llt().solve(syx_post.transpose()).transpose();
  Eigen::MatrixXd s_cond = syy_post - a_mean * syx_post.transpose();
  s_cond = ((s_cond + s_cond.transpose()) / 2.0).eval();

  SpdMatrix sigma = sample_inverse_wishart(prior.nu0 + stats.n,
                                           SpdMatrix(prior.S0.matrix() + s_cond), rng);
  const Eigen::MatrixXd a = sample_matrix_normal(a_mean, sigma, sxx_spd, rng);
  if (order == 0) {
    return VarEmission(Eigen::VectorXd(a.col(0)), std::move(sigma));
  }
  const Eigen::Index d = prior.M.rows();
  std::vector<Eigen::MatrixXd> coeffs;
  coeffs.reserve(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) {
    coeffs.emplace_back(a.middleCols(static_cast<Eigen::Index>(i) * d, d));
  }
  return VarEmission(std::move(coeffs), std::move(sigma));
}

std::vector<VarEmission> resample_emissions(const std::vector<Eigen::MatrixXd>& lag_t,
                                            const std::vector<Eigen::MatrixXd>& target_t,
                                            const std::vector<std::vector<int>>& assignments,
                                            const MniwPrior& prior, int order, int truncation,
                                            RngStream& rng) {
  const Eigen::Index d = target_t.empty() ? prior.S0.dim() : target_t.front().rows();
  const Eigen::Index m = prior.M.cols();
  std::vector<ModeStats> stats(static_cast<std::size_t>(truncation), ModeStats(d, m));
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const auto& z = assignments[i];
    if (static_cast<Eigen::Index>(z.size()) != target_t[i].cols()) {
      throw ShapeError("assignment length must equal the scored frame count");
    }
    for (std::size_t t = 0; t < z.size(); ++t) {
      const int k = z[t];
      if (k < 0 || k >= truncation) {
        throw InvalidParameterError("state assignment " + std::to_string(k) +
                                    " outside [0, " + std::to_string(truncation) + ")");
      }
      auto& s = stats[static_cast<std::size_t>(k)];
      const auto y = target_t[i].col(static_cast<Eigen::Index>(t));
      if (m > 0) {
        const auto x = lag_t[i].col(static_cast<Eigen::Index>(t));
        s.sxx.noalias() += x * x.transpose();
        s.syx.noalias() += y * x.transpose();
      }
      s.syy.noalias() += y * y.transpose();
      s.n += 1.0;
    }
  }
  std::vector<VarEmission> out;
  out.reserve(static_cast<std::size_t>(truncation));
  for (int k = 0; k < truncation; ++k) {
    out.push_back(draw_mniw(stats[static_cast<std::size_t>(k)], prior, order, rng));
  }
  return out;
}

// Per-frame per-mode emission log-likelihoods (scored frames x modes).
Eigen::MatrixXd build_loglik_table(const std::vector<VarEmission>& emissions,
                                   const Eigen::MatrixXd& lag_t, const Eigen::MatrixXd& target_t) {
  const Eigen::Index scored = target_t.cols();
  const Eigen::Index d = target_t.rows();
  const Eigen::Index modes = static_cast<Eigen::Index>(emissions.size());
  Eigen::MatrixXd table(scored, modes);
  for (Eigen::Index k = 0; k < modes; ++k) {
    const VarEmission& em = emissions[static_cast<std::size_t>(k)];
    Eigen::MatrixXd resid;
    if (em.order() > 0) {
      resid = target_t - em.stacked_coeffs() * lag_t;
    } else {
      resid = target_t.colwise() - em.mean();
    }
    const Eigen::MatrixXd w = em.noise().llt().matrixL().solve(resid);
    const double c = static_cast<double>(d) * kLogTwoPi + em.noise().log_det();
    table.col(k) =
        (-0.5 * (w.colwise().squaredNorm().transpose().array() + c)).matrix();
  }
  return table;
}

// Backward message passing then forward sampling, all in the log domain
// (per-step renormalization keeps the linear-domain matvec stable).
std::vector<int> sample_states_from_table(const Eigen::MatrixXd& table, const Eigen::MatrixXd& pi,
                                          const Eigen::VectorXd& init, RngStream& rng) {
  const Eigen::Index scored = table.rows();
  const Eigen::Index modes = table.cols();
  const Eigen::MatrixXd pi_f = pi.cwiseMax(kProbFloor);
  const Eigen::MatrixXd log_pi_f = pi_f.array().log().matrix();

  Eigen::MatrixXd back(scored, modes);
  back.row(scored - 1).setZero();
  for (Eigen::Index t = scored - 2; t >= 0; --t) {
    const Eigen::VectorXd v = (table.row(t + 1) + back.row(t + 1)).transpose();
    const double vmax = v.maxCoeff();
    const Eigen::VectorXd u = (v.array() - vmax).exp().matrix();
    back.row(t) = ((pi_f * u).array().log() + vmax).matrix().transpose();
  }

  std::vector<int> z(static_cast<std::size_t>(scored));
  Eigen::VectorXd logw = init.cwiseMax(kProbFloor).array().log().matrix() +
                         table.row(0).transpose() + back.row(0).transpose();
  z[0] = sample_categorical_from_log(logw, rng);
  for (Eigen::Index t = 1; t < scored; ++t) {
    logw = log_pi_f.row(z[static_cast<std::size_t>(t - 1)]).transpose() +
           table.row(t).transpose() + back.row(t).transpose();
    z[static_cast<std::size_t>(t)] = sample_categorical_from_log(logw, rng);
  }
  return z;
}

}  // namespace

void validate(const GibbsConfig& config) {
  if (config.order < 0) {
    throw InvalidParameterError("emission order must be >= 0");
  }
  if (config.truncation < 1) {
    throw InvalidParameterError("truncation must be >= 1");
  }
  if (config.max_iters < 1) {
    throw InvalidParameterError("max_iters must be >= 1");
  }
  if (config.burn_in <= 0 || config.burn_in >= config.max_iters) {
    throw InvalidParameterError("burn_in must satisfy 0 < burn_in < max_iters");
  }
  if (config.point_estimate_window < 1 || config.point_estimate_window > config.max_iters) {
    throw InvalidParameterError("point_estimate_window must be in [1, max_iters]");
  }
  if (!(config.iw_scale_factor > 0.0)) {
    throw InvalidParameterError("iw_scale_factor must be positive");
  }
  if (!(config.mniw_k_scale > 0.0)) {
    throw InvalidParameterError("mniw_k_scale must be positive");
  }
  if (config.iw_dof_offset < 0.0) {
    throw InvalidParameterError("iw_dof_offset must be nonnegative");
  }
  if (config.hyper_inner_iters < 1) {
    throw InvalidParameterError("hyper_inner_iters must be >= 1");
  }
  for (const auto* p : {&config.gamma_prior, &config.alpha_kappa_prior}) {
    if (!(p->shape > 0.0) || !(p->rate > 0.0)) {
      throw InvalidParameterError("gamma priors need positive shape and rate");
    }
  }
  if (!(config.rho_prior.a > 0.0) || !(config.rho_prior.b > 0.0)) {
    throw InvalidParameterError("rho prior needs positive parameters");
  }
}

SpdMatrix empirical_iw_scale(const std::vector<ObservationSequence>& dataset,
                             double scale_factor) {
  if (!(scale_factor > 0.0)) {
    throw InvalidParameterError("iw scale factor must be positive");
  }
  if (dataset.empty()) {
    throw InsufficientDataError("empirical covariance needs data");
  }
  const Eigen::Index d = dataset.front().dim();
  Eigen::Index n = 0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& seq : dataset) {
    validate(seq);
    if (seq.dim() != d) {
      throw ShapeError("all sequences must share the observation dimension");
    }
    mean += seq.data.colwise().sum().transpose();
    n += seq.frames();
  }
  if (n <= d) {
    throw InsufficientDataError("pooled frame count " + std::to_string(n) +
                                " must exceed the dimension " + std::to_string(d));
  }
  mean /= static_cast<double>(n);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (const auto& seq : dataset) {
    const Eigen::MatrixXd centered = seq.data.rowwise() - mean.transpose();
    scatter.noalias() += centered.transpose() * centered;
  }
  const Eigen::MatrixXd cov = scatter / static_cast<double>(n - 1);
  try {
    return SpdMatrix(scale_factor * cov);
  } catch (const InvalidParameterError&) {
    throw NumericalError("pooled empirical covariance is singular (after jitter)");
  }
}

MniwPrior resolve_mniw_prior(const GibbsConfig& config,
                             const std::vector<ObservationSequence>& dataset, int obs_dim) {
  validate(config);
  const int m = design_dim(config, obs_dim);
  const double nu0 = static_cast<double>(obs_dim) + config.iw_dof_offset;
  if (nu0 <= static_cast<double>(obs_dim) - 1.0) {
    throw InvalidParameterError("inverse-Wishart dof is improper");
  }

  Eigen::MatrixXd big_m = Eigen::MatrixXd::Zero(obs_dim, m);
  if (config.mniw_M) {
    if (config.mniw_M->rows() != obs_dim || config.mniw_M->cols() != m) {
      throw ShapeError("mniw_M override must be obs_dim x design_dim");
    }
    big_m = *config.mniw_M;
  }
  Eigen::MatrixXd big_k(m, m);
  if (m > 0) {
    if (config.mniw_K) {
      if (config.mniw_K->rows() != m || config.mniw_K->cols() != m) {
        throw ShapeError("mniw_K override must be design_dim x design_dim");
      }
      big_k = SpdMatrix(*config.mniw_K).matrix();
    } else {
      big_k = config.mniw_k_scale * Eigen::MatrixXd::Identity(m, m);
    }
  }

  if (config.iw_scale) {
    SpdMatrix s0(*config.iw_scale);
    if (s0.dim() != obs_dim) {
      throw ShapeError("iw_scale override must be obs_dim x obs_dim");
    }
    return MniwPrior{std::move(big_m), std::move(big_k), nu0, std::move(s0)};
  }
  return MniwPrior{std::move(big_m), std::move(big_k), nu0,
                   empirical_iw_scale(dataset, config.iw_scale_factor)};
}

std::vector<int> sample_state_sequence(const ShdpVarModel& model, const ObservationSequence& seq,
                                       RngStream& rng) {
  validate(model);
  validate(seq);
  if (seq.dim() != model.obs_dim) {
    throw ShapeError("sequence dimension does not match the model");
  }
  if (seq.frames() <= model.order) {
    throw InsufficientHistoryError("sequence must be longer than the order");
  }
  Eigen::MatrixXd lag_t, target_t;
  build_design(seq, model.order, model.obs_dim * model.order, lag_t, target_t);
  const Eigen::MatrixXd table = build_loglik_table(model.emissions, lag_t, target_t);
  return sample_states_from_table(table, model.hdp.pi, model.initial_distribution, rng);
}

std::vector<VarEmission> update_emissions(const std::vector<ObservationSequence>& dataset,
                                          const std::vector<std::vector<int>>& assignments,
                                          const GibbsConfig& config, RngStream& rng) {
  const int d = checked_obs_dim(dataset, config);
  if (assignments.size() != dataset.size()) {
    throw ShapeError("one assignment vector per sequence is required");
  }
  const MniwPrior prior = resolve_mniw_prior(config, dataset, d);
  const int m = design_dim(config, d);
  std::vector<Eigen::MatrixXd> lag_t(dataset.size()), target_t(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    build_design(dataset[i], config.order, m, lag_t[i], target_t[i]);
  }
  return resample_emissions(lag_t, target_t, assignments, prior, config.order, config.truncation,
                            rng);
}

Eigen::MatrixXd update_transitions(const Eigen::MatrixXd& counts, const Eigen::VectorXd& beta,
                                   double alpha, double kappa, RngStream& rng) {
  const Eigen::Index modes = beta.size();
  if (counts.rows() != modes || counts.cols() != modes) {
    throw ShapeError("transition counts must be L x L");
  }
  if (!counts.allFinite() || counts.minCoeff() < 0.0) {
    throw InvalidParameterError("transition counts must be finite and nonnegative");
  }
  if (!(alpha > 0.0) || kappa < 0.0) {
    throw InvalidParameterError("need alpha > 0 and kappa >= 0");
  }
  Eigen::MatrixXd pi(modes, modes);
  for (Eigen::Index j = 0; j < modes; ++j) {
    // Tiny floor keeps exact zeros in beta from producing an improper
    // Dirichlet; it only moves mass that is already negligible.
    Eigen::VectorXd conc = (alpha * beta).cwiseMax(1e-12);
    conc[j] += kappa;
    conc += counts.row(j).transpose();
    pi.row(j) = sample_dirichlet(conc, rng).transpose();
  }
  return pi;
}

TableCounts sample_table_counts(const Eigen::MatrixXd& counts, const Eigen::VectorXd& beta,
                                double alpha, double kappa, double rho, RngStream& rng) {
  const Eigen::Index modes = beta.size();
  if (counts.rows() != modes || counts.cols() != modes) {
    throw ShapeError("transition counts must be L x L");
  }
  if (rho < 0.0 || rho > 1.0) {
    throw InvalidParameterError("rho must lie in [0, 1]");
  }
  TableCounts out;
  out.tables = Eigen::MatrixXd::Zero(modes, modes);
  out.overrides = Eigen::VectorXd::Zero(modes);
  for (Eigen::Index j = 0; j < modes; ++j) {
    for (Eigen::Index k = 0; k < modes; ++k) {
      const auto n = static_cast<int>(std::llround(counts(j, k)));
      if (n < 0) {
        throw InvalidParameterError("transition counts must be nonnegative");
      }
      if (n == 0) {
        continue;
      }
      const double conc = alpha * beta[k] + (j == k ? kappa : 0.0);
      out.tables(j, k) = static_cast<double>(sample_crt(n, conc, rng));
    }
  }
  out.corrected = out.tables;
  for (Eigen::Index j = 0; j < modes; ++j) {
    const auto m_self = static_cast<int>(std::llround(out.tables(j, j)));
    if (m_self == 0) {
      continue;
    }
    const double denom = rho + beta[j] * (1.0 - rho);
    const double p_override = denom > 0.0 ? rho / denom : 0.0;
    const int w = sample_binomial(m_self, p_override, rng);
    out.overrides[j] = static_cast<double>(w);
    out.corrected(j, j) = static_cast<double>(m_self - w);
  }
  return out;
}

Eigen::VectorXd update_global_beta(const Eigen::VectorXd& dish_counts, double gamma_conc,
                                   RngStream& rng) {
  if (!(gamma_conc > 0.0)) {
    throw InvalidParameterError("gamma concentration must be positive");
  }
  if (dish_counts.size() < 1 || dish_counts.minCoeff() < 0.0) {
    throw InvalidParameterError("dish counts must be nonnegative");
  }
  const double per_mode = gamma_conc / static_cast<double>(dish_counts.size());
  return sample_dirichlet((dish_counts.array() + per_mode).matrix(), rng);
}

HyperSample resample_hyperparameters(const HyperStats& stats, const GammaPrior& alpha_kappa_prior,
                                     const GammaPrior& gamma_prior, const BetaPrior& rho_prior,
                                     double alpha_plus_kappa, double gamma_conc, int inner_iters,
                                     RngStream& rng) {
  if (inner_iters < 1) {
    throw InvalidParameterError("hyperparameter resampling needs >= 1 inner iteration");
  }
  HyperSample out;

  // (alpha + kappa): auxiliary-variable scheme over the transition rows.
  double ak = alpha_plus_kappa;
  std::vector<double> row_customers;
  for (Eigen::Index j = 0; j < stats.customers_per_row.size(); ++j) {
    if (stats.customers_per_row[j] > 0.0) {
      row_customers.push_back(stats.customers_per_row[j]);
    }
  }
  if (row_customers.empty() || stats.total_tables <= 0.0) {
    ak = sample_gamma(alpha_kappa_prior.shape, alpha_kappa_prior.rate, rng);
  } else {
    for (int it = 0; it < inner_iters; ++it) {
      double sum_log_w = 0.0;
      double sum_s = 0.0;
      for (double n_j : row_customers) {
        sum_log_w += std::log(sample_beta(ak + 1.0, n_j, rng));
        if (rng.uniform() < n_j / (n_j + ak)) {
          sum_s += 1.0;
        }
      }
      ak = sample_gamma(alpha_kappa_prior.shape + stats.total_tables - sum_s,
                        alpha_kappa_prior.rate - sum_log_w, rng);
    }
  }

  // gamma: the weak-limit prior on beta is a finite symmetric
  // Dirichlet(gamma/L), so the dish-draw likelihood is Dirichlet-multinomial
  // with L categories, not the infinite CRP form. CRT counts per dish handle
  // the Gamma(gamma/L + c_k)/Gamma(gamma/L) factors exactly and a Beta
  // auxiliary handles Gamma(gamma)/Gamma(gamma + n); the conditional is then
  // conjugate.
  double g = gamma_conc;
  const double total_draws = stats.dish_counts.size() > 0 ? stats.dish_counts.sum() : 0.0;
  if (total_draws <= 0.0) {
    g = sample_gamma(gamma_prior.shape, gamma_prior.rate, rng);
  } else {
    const auto modes = static_cast<double>(stats.dish_counts.size());
    for (int it = 0; it < inner_iters; ++it) {
      double table_sum = 0.0;
      for (Eigen::Index k = 0; k < stats.dish_counts.size(); ++k) {
        const auto c_k = static_cast<int>(std::llround(stats.dish_counts[k]));
        if (c_k > 0) {
          table_sum += static_cast<double>(sample_crt(c_k, g / modes, rng));
        }
      }
      const double eta = sample_beta(g, total_draws, rng);
      g = sample_gamma(gamma_prior.shape + table_sum, gamma_prior.rate - std::log(eta), rng);
    }
  }

  // rho: every table is an override trial; non-self tables are forced
  // non-overrides, so the Beta posterior counts all tables.
  out.rho = sample_beta(rho_prior.a + stats.total_overrides,
                        rho_prior.b + stats.total_tables - stats.total_overrides, rng);
  out.alpha_plus_kappa = ak;
  out.gamma = g;
  out.alpha = (1.0 - out.rho) * ak;
  out.kappa = out.rho * ak;
  return out;
}

ShdpVarModel sample_prior_model(const GibbsConfig& config, int obs_dim, RngStream& rng) {
  validate(config);
  if (!config.iw_scale) {
    throw InvalidParameterError("sample_prior_model requires an explicit iw_scale");
  }
  const MniwPrior prior = resolve_mniw_prior(config, {}, obs_dim);
  const int L = config.truncation;

  ShdpVarModel model;
  model.obs_dim = obs_dim;
  model.order = config.order;
  model.hdp.truncation = L;
  const double ak = sample_gamma(config.alpha_kappa_prior.shape, config.alpha_kappa_prior.rate, rng);
  model.hdp.rho = sample_beta(config.rho_prior.a, config.rho_prior.b, rng);
  model.hdp.gamma = sample_gamma(config.gamma_prior.shape, config.gamma_prior.rate, rng);
  model.hdp.alpha = (1.0 - model.hdp.rho) * ak;
  model.hdp.kappa = model.hdp.rho * ak;
  model.hdp.beta = update_global_beta(Eigen::VectorXd::Zero(L), model.hdp.gamma, rng);
  model.hdp.pi = update_transitions(Eigen::MatrixXd::Zero(L, L), model.hdp.beta, model.hdp.alpha,
                                    model.hdp.kappa, rng);
  const ModeStats empty(obs_dim, prior.M.cols());
  model.emissions.reserve(static_cast<std::size_t>(L));
  for (int k = 0; k < L; ++k) {
    model.emissions.push_back(draw_mniw(empty, prior, config.order, rng));
  }
  model.initial_distribution = config.uniform_initial_distribution
                                   ? Eigen::VectorXd::Constant(L, 1.0 / L)
                                   : model.hdp.beta;
  validate(model);
  return model;
}

GibbsSampler::GibbsSampler(std::vector<ObservationSequence> dataset, const GibbsConfig& config,
                           RngStream rng)
    : config_(config),
      rng_(std::move(rng)),
      dataset_(std::move(dataset)),
      prior_(resolve_mniw_prior(config_, dataset_, checked_obs_dim(dataset_, config_))),
      obs_dim_(static_cast<int>(dataset_.front().dim())),
      design_dim_(design_dim(config_, obs_dim_)) {
  rebuild_designs();

  // Deterministic placeholder state so model() is valid before initialize().
  const int L = config_.truncation;
  const double ak = config_.alpha_kappa_prior.shape / config_.alpha_kappa_prior.rate;
  rho_ = config_.rho_prior.a / (config_.rho_prior.a + config_.rho_prior.b);
  gamma_ = config_.gamma_prior.shape / config_.gamma_prior.rate;
  alpha_ = (1.0 - rho_) * ak;
  kappa_ = rho_ * ak;
  beta_ = Eigen::VectorXd::Constant(L, 1.0 / L);
  pi_ = Eigen::MatrixXd::Constant(L, L, 1.0 / L);
  const double sigma_denom = prior_.nu0 - obs_dim_ - 1.0;
  const SpdMatrix sigma0(sigma_denom > 0.0 ? (prior_.S0.matrix() / sigma_denom).eval()
                                           : prior_.S0.matrix());
  for (int k = 0; k < L; ++k) {
    if (config_.order > 0) {
      std::vector<Eigen::MatrixXd> coeffs;
      for (int i = 0; i < config_.order; ++i) {
        coeffs.push_back(prior_.M.middleCols(static_cast<Eigen::Index>(i) * obs_dim_, obs_dim_));
      }
      emissions_.emplace_back(std::move(coeffs), sigma0);
    } else if (design_dim_ == 1) {
      emissions_.emplace_back(Eigen::VectorXd(prior_.M.col(0)), sigma0);
    } else {
      emissions_.emplace_back(sigma0);
    }
  }
}

void GibbsSampler::rebuild_designs() {
  lag_t_.resize(dataset_.size());
  target_t_.resize(dataset_.size());
  z_.resize(dataset_.size());
  for (std::size_t i = 0; i < dataset_.size(); ++i) {
    build_design(dataset_[i], config_.order, design_dim_, lag_t_[i], target_t_[i]);
    const auto scored = static_cast<std::size_t>(target_t_[i].cols());
    if (z_[i].size() != scored) {
      z_[i].assign(scored, 0);
    }
  }
}

Eigen::MatrixXd GibbsSampler::loglik_table(std::size_t seq_index) const {
  return build_loglik_table(emissions_, lag_t_[seq_index], target_t_[seq_index]);
}

Eigen::VectorXd GibbsSampler::initial_distribution() const {
  if (config_.uniform_initial_distribution) {
    return Eigen::VectorXd::Constant(config_.truncation, 1.0 / config_.truncation);
  }
  return beta_;
}

void GibbsSampler::initialize() {
  const int L = config_.truncation;
  for (auto& z : z_) {
    for (auto& zt : z) {
      zt = static_cast<int>(rng_() % static_cast<std::uint64_t>(L));
    }
  }
  emissions_ = resample_emissions(lag_t_, target_t_, z_, prior_, config_.order, L, rng_);

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(L, L);
  Eigen::VectorXd init_counts = Eigen::VectorXd::Zero(L);
  for (const auto& z : z_) {
    init_counts[z.front()] += 1.0;
    for (std::size_t t = 1; t < z.size(); ++t) {
      counts(z[t - 1], z[t]) += 1.0;
    }
  }
  const TableCounts tables = sample_table_counts(counts, beta_, alpha_, kappa_, rho_, rng_);
  const Eigen::VectorXd dish_counts =
      tables.corrected.colwise().sum().transpose() + init_counts;
  beta_ = update_global_beta(dish_counts, gamma_, rng_);
  pi_ = update_transitions(counts, beta_, alpha_, kappa_, rng_);
  sweeps_ = 0;
}

void GibbsSampler::set_state(const ShdpVarModel& model) {
  validate(model);
  if (model.hdp.truncation != config_.truncation || model.obs_dim != obs_dim_ ||
      model.order != config_.order) {
    throw ShapeError("model state does not match the sampler configuration");
  }
  beta_ = model.hdp.beta;
  pi_ = model.hdp.pi;
  alpha_ = model.hdp.alpha;
  gamma_ = model.hdp.gamma;
  kappa_ = model.hdp.kappa;
  rho_ = model.hdp.rho;
  emissions_ = model.emissions;
}

void GibbsSampler::set_data(std::vector<ObservationSequence> dataset) {
  const int d = checked_obs_dim(dataset, config_);
  if (d != obs_dim_) {
    throw ShapeError("replacement data must keep the observation dimension");
  }
  if (!config_.iw_scale) {
    throw InvalidParameterError(
        "set_data requires an explicit iw_scale (the default scale is data-dependent)");
  }
  dataset_ = std::move(dataset);
  rebuild_designs();
}

void GibbsSampler::sweep() {
  const int L = config_.truncation;

  // Blocked state draw per sequence.
  const Eigen::VectorXd init = initial_distribution();
  for (std::size_t i = 0; i < dataset_.size(); ++i) {
    z_[i] = sample_states_from_table(loglik_table(i), pi_, init, rng_);
  }

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(L, L);
  Eigen::VectorXd init_counts = Eigen::VectorXd::Zero(L);
  for (const auto& z : z_) {
    init_counts[z.front()] += 1.0;
    for (std::size_t t = 1; t < z.size(); ++t) {
      counts(z[t - 1], z[t]) += 1.0;
    }
  }

  const TableCounts tables = sample_table_counts(counts, beta_, alpha_, kappa_, rho_, rng_);
  // Initial states are direct categorical draws from beta, so they add raw
  // counts to the top-level Dirichlet alongside the corrected tables.
  const Eigen::VectorXd dish_counts =
      tables.corrected.colwise().sum().transpose() + init_counts;

  hypers_resampled_ = false;
  if (config_.resample_hypers) {
    HyperStats stats;
    stats.customers_per_row = counts.rowwise().sum();
    stats.total_tables = tables.tables.sum();
    stats.total_overrides = tables.overrides.sum();
    stats.dish_counts = dish_counts;
    const HyperSample h =
        resample_hyperparameters(stats, config_.alpha_kappa_prior, config_.gamma_prior,
                                 config_.rho_prior, alpha_ + kappa_, gamma_,
                                 config_.hyper_inner_iters, rng_);
    alpha_ = h.alpha;
    kappa_ = h.kappa;
    gamma_ = h.gamma;
    rho_ = h.rho;
    hypers_resampled_ = true;
  }

  beta_ = update_global_beta(dish_counts, gamma_, rng_);
  pi_ = update_transitions(counts, beta_, alpha_, kappa_, rng_);
  emissions_ = resample_emissions(lag_t_, target_t_, z_, prior_, config_.order, L, rng_);
  ++sweeps_;
}

ShdpVarModel GibbsSampler::model() const {
  ShdpVarModel m;
  m.hdp.truncation = config_.truncation;
  m.hdp.beta = beta_;
  m.hdp.pi = pi_;
  m.hdp.alpha = alpha_;
  m.hdp.gamma = gamma_;
  m.hdp.kappa = kappa_;
  m.hdp.rho = rho_;
  m.emissions = emissions_;
  m.obs_dim = obs_dim_;
  m.order = config_.order;
  m.initial_distribution = initial_distribution();
  validate(m);
  return m;
}

double GibbsSampler::data_loglik() const {
  const ShdpVarModel m = model();
  double total = 0.0;
  for (const auto& seq : dataset_) {
    const Eigen::VectorXd curve = forward_cumulative_loglik(m, seq);
    total += curve[curve.size() - 1];
  }
  return total;
}

int GibbsSampler::active_modes() const {
  std::vector<bool> seen(static_cast<std::size_t>(config_.truncation), false);
  for (const auto& z : z_) {
    for (int zt : z) {
      seen[static_cast<std::size_t>(zt)] = true;
    }
  }
  return static_cast<int>(std::count(seen.begin(), seen.end(), true));
}

FitResult fit(const std::vector<ObservationSequence>& dataset, const GibbsConfig& config,
              RngStream rng) {
  GibbsSampler sampler(dataset, config, std::move(rng));
  sampler.initialize();

  GibbsDiagnostics diag;
  diag.joint_loglik.reserve(static_cast<std::size_t>(config.max_iters));
  double best = -std::numeric_limits<double>::infinity();
  std::optional<ShdpVarModel> snapshot;

  for (int it = 1; it <= config.max_iters; ++it) {
    sampler.sweep();
    const double loglik = sampler.data_loglik();
    if (!std::isfinite(loglik)) {
      throw NumericalError("joint log-likelihood became non-finite at sweep " +
                           std::to_string(it));
    }
    diag.joint_loglik.push_back(loglik);
    diag.active_modes.push_back(sampler.active_modes());
    diag.alpha_trace.push_back(sampler.alpha());
    diag.gamma_trace.push_back(sampler.gamma_conc());
    diag.kappa_trace.push_back(sampler.kappa());
    diag.rho_trace.push_back(sampler.rho());
    if (sampler.hypers_resampled_last_sweep()) {
      ++diag.hyper_resamples;
    }
    if (it > config.max_iters - config.point_estimate_window && loglik > best) {
      best = loglik;
      snapshot = sampler.model();
      diag.point_estimate_iter = it;
    }
  }
  return FitResult{std::move(*snapshot), std::move(diag)};
}

}  // namespace varhmm
