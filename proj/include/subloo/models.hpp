#pragma once

#include <cstdint>
#include <vector>

#include "subloo/types.hpp"

namespace subloo::models {

// ---------------------------------------------------------------------------
// Bayesian linear regression with a normal-inverse-gamma prior. Everything
// here is closed form: exact posterior, exact draws, and an exact
// leave-one-out oracle, so surrogate and estimator tests carry no sampler
// noise.
// ---------------------------------------------------------------------------

struct BlrDataset {
  Eigen::MatrixXd design;   // n x p, standard-normal covariates
  Eigen::VectorXd response; // length n
  Eigen::VectorXd true_beta;
  double noise_sd = 1.0;
  double target_r2 = 0.5;

  std::int64_t n() const { return design.rows(); }
  std::int64_t p() const { return design.cols(); }
};

// Dense mode sets every coefficient to 1; sparse mode keeps a single nonzero
// coefficient. The noise sd is solved so the population R^2 hits target_r2.
BlrDataset simulate_blr(std::int64_t n, std::int64_t p, double target_r2,
                        bool sparse, std::uint64_t seed);

struct NigPrior {
  double coef_scale2 = 100.0;  // prior covariance of beta is coef_scale2 * sigma^2-free V0 = coef_scale2 * I
  double shape = 2.0;          // inverse-gamma shape a0
  double scale = 2.0;          // inverse-gamma scale b0
};

struct ConjugateBlrPosterior {
  Eigen::VectorXd coef_mean;   // mu_n
  Eigen::MatrixXd coef_scale;  // V_n; cov(beta | sigma^2) = sigma^2 * V_n
  double ig_shape = 0.0;       // a_n
  double ig_scale = 0.0;       // b_n

  // Marginal posterior covariance of beta (needs ig_shape > 1).
  Eigen::MatrixXd coef_marginal_cov() const;
};

ConjugateBlrPosterior fit_conjugate_blr(const BlrDataset& data,
                                        const NigPrior& prior);

// S exact posterior draws, one row per draw: columns are the coefficients
// followed by sigma^2.
Eigen::MatrixXd draw_posterior(const ConjugateBlrPosterior& posterior,
                               std::int64_t draws, std::uint64_t seed);

// Gaussian per-observation log density at every draw.
LogLikMatrix loglik_matrix(const BlrDataset& data,
                           const Eigen::MatrixXd& draws);

// Exact leave-one-out log predictive densities via rank-one downdates of the
// posterior precision; each held-out predictive is a Student-t.
std::vector<double> exact_loo_blr(const BlrDataset& data,
                                  const NigPrior& prior, int threads = 1);

// Brute-force variant refitting the posterior from scratch per held-out
// observation. Test oracle; O(n) full fits.
std::vector<double> exact_loo_blr_refit(const BlrDataset& data,
                                        const NigPrior& prior);

// The likelihood-parameter vector used by the Taylor surrogates is
// theta = (beta, log sigma), unconstrained in every coordinate.
Eigen::VectorXd point_estimate_from_draws(const Eigen::MatrixXd& draws);
GaussianPosteriorSummary posterior_summary_from_draws(
    const Eigen::MatrixXd& draws);

// log p(y_i|theta) for all i at a fixed theta = (beta, log sigma).
std::vector<double> loglik_row_at(const BlrDataset& data,
                                  const Eigen::VectorXd& theta);

// Analytic gradients (and optionally Hessians) of the Gaussian
// log-likelihood per observation at theta = (beta, log sigma).
PerObsDerivatives per_obs_derivatives(const BlrDataset& data,
                                      const Eigen::VectorXd& theta,
                                      bool with_hessians);

// ---------------------------------------------------------------------------
// Fixed-noise variant: sigma known, Gaussian posterior over beta alone. The
// log-likelihood is then exactly quadratic in the parameters, which makes
// the second-order Taylor effective-parameter value exact.
// ---------------------------------------------------------------------------

struct FixedNoiseBlrPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double noise_sd = 1.0;
};

FixedNoiseBlrPosterior fit_fixed_noise_blr(const BlrDataset& data,
                                           double prior_var, double noise_sd);
Eigen::MatrixXd draw_fixed_noise(const FixedNoiseBlrPosterior& posterior,
                                 std::int64_t draws, std::uint64_t seed);
LogLikMatrix loglik_matrix_fixed_noise(const BlrDataset& data,
                                       const Eigen::MatrixXd& beta_draws,
                                       double noise_sd);
PerObsDerivatives per_obs_derivatives_fixed_noise(const BlrDataset& data,
                                                  const Eigen::VectorXd& beta,
                                                  double noise_sd,
                                                  bool with_hessians);

// ---------------------------------------------------------------------------
// Logistic regression with a Gaussian prior, fit by Newton iteration and
// summarized by the Laplace approximation.
// ---------------------------------------------------------------------------

struct LogisticDataset {
  Eigen::MatrixXd design;
  Eigen::VectorXd response;  // entries in {0, 1}
  Eigen::VectorXd true_beta;

  std::int64_t n() const { return design.rows(); }
  std::int64_t p() const { return design.cols(); }
};

LogisticDataset simulate_logistic(std::int64_t n, std::int64_t p,
                                  std::uint64_t seed);

struct LaplaceFit {
  GaussianPosteriorSummary posterior;  // mode and inverse negative Hessian
  int iterations = 0;
  double grad_norm = 0.0;
};

// Throws DegeneracyError when Newton fails to converge within max_iter or
// the mode diverges (separable data).
LaplaceFit logistic_laplace(const LogisticDataset& data, double prior_sd,
                            int max_iter, double tol);

LogLikMatrix logistic_loglik_matrix(const LogisticDataset& data,
                                    const Eigen::MatrixXd& beta_draws);

// S rows drawn from the Gaussian posterior summary.
Eigen::MatrixXd draw_gaussian(const GaussianPosteriorSummary& posterior,
                              std::int64_t draws, std::uint64_t seed);

// Per-draw log p~(theta|y) - log q(theta), the generalized importance-weight
// correction for approximate-posterior proposals.
std::vector<double> logistic_draw_log_weight_offsets(
    const LogisticDataset& data, double prior_sd,
    const GaussianPosteriorSummary& proposal,
    const Eigen::MatrixXd& beta_draws);

// Leave-one-out oracle by refitting the Laplace approximation without each
// observation and integrating the held-out likelihood over it by fixed-seed
// Monte Carlo. Guarded to n <= 500.
std::vector<double> logistic_loo_refit_oracle(const LogisticDataset& data,
                                              double prior_sd, int max_iter,
                                              double tol,
                                              std::int64_t oracle_draws,
                                              std::uint64_t seed,
                                              int threads = 1);

}  // namespace subloo::models
