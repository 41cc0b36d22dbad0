#pragma once

#include <span>

#include "subloo/subsample.hpp"
#include "subloo/types.hpp"

namespace subloo {

// Difference-estimator family. `surrogate` holds the length-n approximation,
// `exact_at_sample` the exact leave-one-out values for plan.indices in plan
// order. All totals are on the sum-over-observations scale.

// total-elpd estimate: sum(surrogate) + (n/m) * sum(exact_j - surrogate_j)
// over the subsample. Unbiased for sum(exact) under srs_wor and srs_wr.
double diff_elpd(const SurrogateVector& surrogate,
                 std::span<const double> exact_at_sample,
                 const SubsamplePlan& plan);

// Subsampling variance of diff_elpd under srs_wor:
// n^2 (1 - m/n) s_e^2 / m with s_e^2 the sample variance of the residuals.
double diff_variance(const SurrogateVector& surrogate,
                     std::span<const double> exact_at_sample,
                     const SubsamplePlan& plan);

// With-replacement counterpart (no finite-population correction).
double diff_variance_wr(const SurrogateVector& surrogate,
                        std::span<const double> exact_at_sample,
                        const SubsamplePlan& plan);

struct Sigma2Loo {
  double value = 0.0;       // clamped at 0
  double raw = 0.0;         // unclamped; what the unbiasedness proofs cover
  bool degenerate = false;  // true when the raw estimate was negative
};

// Estimate of the per-observation population variance of the exact
// leave-one-out values, sigma^2_loo = (1/n) sum pi^2 - ((1/n) sum pi)^2,
// assembled from the squared-surrogate difference estimator and a
// bias-corrected square of the total. Unbiased; may go negative for small m,
// in which case it is clamped and flagged.
Sigma2Loo diff_sigma2_loo(const SurrogateVector& surrogate,
                          std::span<const double> exact_at_sample,
                          const SubsamplePlan& plan, double elpd_hat,
                          double var_hat);

// Hansen-Hurwitz baseline over a pps_wr plan: (1/m) sum exact_j / p_j.
double hh_elpd(std::span<const double> exact_at_sample,
               const SubsamplePlan& plan);

// Textbook HH sampling-variance estimate: s^2(exact_j / p_j) / m.
double hh_variance(std::span<const double> exact_at_sample,
                   const SubsamplePlan& plan);

// Bundles the point estimate with both uncertainty scales, dispatching on
// the plan's scheme (diff for srs_wor/srs_wr, HH for pps_wr).
ElpdEstimate estimate_model(const SurrogateVector& surrogate,
                            std::span<const double> exact_at_sample,
                            const SubsamplePlan& plan);

// Runs the difference estimator on the per-observation differences
// (model A - model B) over one shared plan, which accounts for the
// between-model covariance implicitly. Also reports per-model estimates and
// the naive sqrt(sigma_A^2 + sigma_B^2) for comparison.
ComparisonResult compare_models(const SurrogateVector& surrogate_a,
                                const SurrogateVector& surrogate_b,
                                std::span<const double> exact_a_at_sample,
                                std::span<const double> exact_b_at_sample,
                                const SubsamplePlan& plan);

}  // namespace subloo
