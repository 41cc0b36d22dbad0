#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace subloo {

// S posterior draws x n observations of per-observation log-likelihood.
// Stored column-major so the per-observation draw vectors the reductions
// consume are contiguous.
struct LogLikMatrix {
  Eigen::MatrixXd values;  // S x n

  std::int64_t draw_count() const { return values.rows(); }
  std::int64_t obs_count() const { return values.cols(); }

  std::span<const double> column(std::int64_t i) const {
    return {values.col(i).data(), static_cast<std::size_t>(values.rows())};
  }

  // Validates S >= 1, n >= 1 and finite entries.
  static LogLikMatrix from_matrix(Eigen::MatrixXd m);
};

enum class SurrogateMethod {
  plpd,
  waic_s,
  tis_s,
  psis,
  delta1_waic_m,
  delta1_waic,
  delta2_waic,
  exact,
};

std::string surrogate_method_name(SurrogateMethod m);
SurrogateMethod surrogate_method_from_name(const std::string& name);

// A length-n approximation of the leave-one-out log predictive densities,
// tagged with how it was produced. pareto_k is populated by the Pareto
// smoother only; -inf entries mean the tail was degenerate and no smoothing
// was needed.
struct SurrogateVector {
  std::vector<double> values;
  SurrogateMethod method = SurrogateMethod::exact;
  std::int64_t draws_used = 0;
  std::optional<std::vector<double>> pareto_k;

  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
};

// Posterior mean and covariance of the likelihood parameters, the inputs to
// the Taylor effective-parameter approximations.
struct GaussianPosteriorSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  // Throws unless covariance is square, matches mean, and is symmetric
  // within 1e-8 relative to its largest entry.
  void validate() const;
};

// Per-observation gradients (n x P) and optional Hessians (n slices of
// P x P) of the log-likelihood at a fixed parameter point. Hessians are only
// materialized when a second-order approximation asks for them.
struct PerObsDerivatives {
  Eigen::MatrixXd gradients;
  std::vector<Eigen::MatrixXd> hessians;

  std::int64_t obs_count() const { return gradients.rows(); }
  std::int64_t param_count() const { return gradients.cols(); }
};

enum class EstimatorKind { diff, hh };

std::string estimator_kind_name(EstimatorKind k);

// Point estimate of the total elpd for one model plus both uncertainty
// scales: the subsampling SE of the estimate itself and the estimated
// per-observation spread of the true leave-one-out values.
struct ElpdEstimate {
  double elpd_hat = 0.0;
  double se_subsampling = 0.0;
  std::optional<double> sigma_loo_hat;  // absent for the HH baseline
  bool sigma_loo_degenerate = false;    // true when the sigma estimate was clamped at 0
  std::int64_t n = 0;
  std::int64_t m = 0;
  EstimatorKind estimator = EstimatorKind::diff;
  std::string surrogate_method;

  double elpd_hat_per_obs() const {
    return elpd_hat / static_cast<double>(n);
  }
};

struct ComparisonResult {
  double elpd_d_hat = 0.0;
  double se_d = 0.0;
  double sigma_d_hat = 0.0;
  bool sigma_d_degenerate = false;
  double naive_sigma_d = 0.0;
  ElpdEstimate model_a;
  ElpdEstimate model_b;
};

}  // namespace subloo
