#pragma once

#include <span>
#include <vector>

#include "subloo/types.hpp"

namespace subloo {

// Column-wise log-mean-exp over all draws: the full-data log predictive
// density log p(y_i|y) per observation.
std::vector<double> lpd(const LogLikMatrix& loglik, int threads = 1);

// The cheapest surrogate: the caller supplies log p(y_i|theta_hat) evaluated
// at a point estimate and it is passed through verbatim.
SurrogateVector plpd_surrogate(std::span<const double> loglik_at_point);

// lpd_i minus the over-draw variance of the log-likelihood, both computed on
// the first draws_used rows.
SurrogateVector waic_surrogate(const LogLikMatrix& loglik,
                               std::int64_t draws_used, int threads = 1);

// Self-normalized importance sampling with ratios truncated at
// tau = mean_ratio * sqrt(draws_used), on the first draws_used rows.
// draw_log_weight_offset, when non-empty, adds log p(theta_s|y)/q(theta_s)
// per draw for approximate-posterior proposals.
SurrogateVector tis_surrogate(const LogLikMatrix& loglik,
                              std::int64_t draws_used,
                              std::span<const double> draw_log_weight_offset = {},
                              int threads = 1);

// Pareto-smoothed importance sampling over all draws, recording the fitted
// tail shape per observation in diagnostics. Needs S >= 25.
SurrogateVector psis_surrogate(const LogLikMatrix& loglik,
                               std::span<const double> draw_log_weight_offset = {},
                               int threads = 1);

enum class DeltaOrder {
  first_marginal,  // gradient term with diag(covariance) only
  first,           // gradient term with the full covariance
  second,          // adds 0.5 tr((H Sigma)^2)
};

// Taylor approximation of the per-observation effective-parameter count.
// Nonnegative for the first-order variants; order `second` requires the
// Hessian slice.
double delta_peff(const Eigen::VectorXd& gradient,
                  const Eigen::MatrixXd* hessian,
                  const GaussianPosteriorSummary& posterior, DeltaOrder order);

// pi_tilde_i = lpd_i - delta_peff_i. The core form takes a precomputed lpd
// vector (the delta part itself never touches the draw matrix); the overload
// computes lpd from the matrix first.
SurrogateVector delta_waic_surrogate(std::span<const double> lpd_values,
                                     const PerObsDerivatives& derivs,
                                     const GaussianPosteriorSummary& posterior,
                                     DeltaOrder order);
SurrogateVector delta_waic_surrogate(const LogLikMatrix& loglik,
                                     const PerObsDerivatives& derivs,
                                     const GaussianPosteriorSummary& posterior,
                                     DeltaOrder order, int threads = 1);

// Wraps known-exact values as a surrogate (zero-residual difference
// estimator).
SurrogateVector exact_surrogate(std::span<const double> exact_values);

namespace detail {

// Single-column truncated-IS estimate; truncation can be disabled to obtain
// the plain self-normalized estimate.
double tis_column(std::span<const double> loglik_col,
                  std::span<const double> draw_log_weight_offset,
                  bool truncate);

}  // namespace detail

}  // namespace subloo
