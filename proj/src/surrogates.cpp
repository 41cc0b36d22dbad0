#include "subloo/surrogates.hpp"

#include <cmath>
#include <limits>

#include "subloo/errors.hpp"
#include "subloo/kernels.hpp"
#include "subloo/numerics.hpp"
#include "subloo/parallel.hpp"
#include "subloo/psis.hpp"

namespace subloo {
namespace {

void check_offsets(std::span<const double> offsets, std::int64_t draws) {
  if (!offsets.empty() && static_cast<std::int64_t>(offsets.size()) < draws)
    throw ValidationError("surrogate: draw log-weight offsets must cover the "
                          "number of draws in use");
}

void check_finite(std::span<const double> v, const char* what) {
  for (const double x : v)
    if (!std::isfinite(x))
      throw ValidationError(std::string(what) + ": entries must be finite");
}

// Raw log importance ratio for leaving out one observation of a
// factorizable likelihood: -log p(y_i|theta_s), plus any proposal offset.
void fill_log_ratios(std::span<const double> col,
                     std::span<const double> offsets,
                     std::vector<double>& out) {
  out.resize(col.size());
  if (offsets.empty()) {
    for (std::size_t s = 0; s < col.size(); ++s) out[s] = -col[s];
  } else {
    for (std::size_t s = 0; s < col.size(); ++s) out[s] = -col[s] + offsets[s];
  }
}

}  // namespace

std::vector<double> lpd(const LogLikMatrix& loglik, int threads) {
  std::vector<double> out(static_cast<std::size_t>(loglik.obs_count()));
  parallel_for(loglik.obs_count(), threads, [&](std::int64_t i) {
    out[static_cast<std::size_t>(i)] = log_mean_exp(loglik.column(i));
  });
  return out;
}

SurrogateVector plpd_surrogate(std::span<const double> loglik_at_point) {
  check_finite(loglik_at_point, "plpd_surrogate");
  SurrogateVector s;
  s.values.assign(loglik_at_point.begin(), loglik_at_point.end());
  s.method = SurrogateMethod::plpd;
  s.draws_used = 1;
  return s;
}

SurrogateVector waic_surrogate(const LogLikMatrix& loglik,
                               std::int64_t draws_used, int threads) {
  if (draws_used < 2)
    throw ValidationError("waic_surrogate: the over-draw variance is "
                          "undefined for fewer than 2 draws");
  if (draws_used > loglik.draw_count())
    throw ValidationError("waic_surrogate: draws_used exceeds the available "
                          "draws");
  SurrogateVector s;
  s.method = SurrogateMethod::waic_s;
  s.draws_used = draws_used;
  s.values.resize(static_cast<std::size_t>(loglik.obs_count()));
  parallel_for(loglik.obs_count(), threads, [&](std::int64_t i) {
    const auto col =
        loglik.column(i).subspan(0, static_cast<std::size_t>(draws_used));
    const double peff = sample_variance(col);
    s.values[static_cast<std::size_t>(i)] = log_mean_exp(col) - peff;
  });
  return s;
}

namespace detail {

double tis_column(std::span<const double> col,
                  std::span<const double> offsets, bool truncate) {
  thread_local std::vector<double> ratios;
  thread_local std::vector<double> truncated;
  fill_log_ratios(col, offsets, ratios);
  if (!truncate || col.size() == 1)
    return self_normalized_log_expectation(col, ratios);
  // log tau = log mean ratio + 0.5 log S
  const double log_tau =
      log_mean_exp(ratios) +
      0.5 * std::log(static_cast<double>(ratios.size()));
  truncated.resize(ratios.size());
  kernels::active().clamp_upper(ratios.data(), ratios.size(), log_tau,
                                truncated.data());
  return self_normalized_log_expectation(col, truncated);
}

}  // namespace detail

SurrogateVector tis_surrogate(const LogLikMatrix& loglik,
                              std::int64_t draws_used,
                              std::span<const double> draw_log_weight_offset,
                              int threads) {
  if (draws_used < 1)
    throw ValidationError("tis_surrogate: needs at least 1 draw");
  if (draws_used > loglik.draw_count())
    throw ValidationError("tis_surrogate: draws_used exceeds the available "
                          "draws");
  check_offsets(draw_log_weight_offset, draws_used);
  SurrogateVector s;
  s.method = SurrogateMethod::tis_s;
  s.draws_used = draws_used;
  s.values.resize(static_cast<std::size_t>(loglik.obs_count()));
  parallel_for(loglik.obs_count(), threads, [&](std::int64_t i) {
    const auto col =
        loglik.column(i).subspan(0, static_cast<std::size_t>(draws_used));
    const auto off = draw_log_weight_offset.empty()
                         ? draw_log_weight_offset
                         : draw_log_weight_offset.subspan(
                               0, static_cast<std::size_t>(draws_used));
    s.values[static_cast<std::size_t>(i)] = detail::tis_column(col, off, true);
  });
  return s;
}

SurrogateVector psis_surrogate(const LogLikMatrix& loglik,
                               std::span<const double> draw_log_weight_offset,
                               int threads) {
  const std::int64_t draws = loglik.draw_count();
  if (draws < 25)
    throw ValidationError("psis_surrogate: needs at least 25 draws for the "
                          "tail fit; use tis_s for smaller draw counts");
  check_offsets(draw_log_weight_offset, draws);
  SurrogateVector s;
  s.method = SurrogateMethod::psis;
  s.draws_used = draws;
  s.values.resize(static_cast<std::size_t>(loglik.obs_count()));
  std::vector<double> ks(static_cast<std::size_t>(loglik.obs_count()));
  parallel_for(loglik.obs_count(), threads, [&](std::int64_t i) {
    thread_local std::vector<double> ratios;
    const auto col = loglik.column(i);
    fill_log_ratios(col, draw_log_weight_offset, ratios);
    ks[static_cast<std::size_t>(i)] = pareto_smooth_log_ratios(ratios);
    s.values[static_cast<std::size_t>(i)] =
        self_normalized_log_expectation(col, ratios);
  });
  s.pareto_k = std::move(ks);
  return s;
}

double delta_peff(const Eigen::VectorXd& gradient,
                  const Eigen::MatrixXd* hessian,
                  const GaussianPosteriorSummary& posterior, DeltaOrder order) {
  posterior.validate();
  const Eigen::Index p = posterior.mean.size();
  if (gradient.size() != p)
    throw ValidationError("delta_peff: gradient dimension does not match the "
                          "posterior");
  // PSD within tolerance; the quadratic form below then cannot go negative
  // beyond rounding.
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(posterior.covariance);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-8 * scale)
      throw DegeneracyError("delta_peff: posterior covariance is not positive "
                            "semi-definite within tolerance");
  }

  double value = 0.0;
  if (order == DeltaOrder::first_marginal) {
    value = (gradient.array().square() *
             posterior.covariance.diagonal().array()).sum();
  } else {
    value = gradient.dot(posterior.covariance * gradient);
  }
  value = std::max(value, 0.0);

  if (order == DeltaOrder::second) {
    if (hessian == nullptr)
      throw ValidationError("delta_peff: order-2 approximation requires the "
                            "Hessian");
    if (hessian->rows() != p || hessian->cols() != p)
      throw ValidationError("delta_peff: Hessian dimension does not match "
                            "the posterior");
    // tr((H Sigma)(H Sigma)) without forming the 4-index product
    const Eigen::MatrixXd hs = (*hessian) * posterior.covariance;
    value += 0.5 * hs.cwiseProduct(hs.transpose()).sum();
  }
  return value;
}

namespace {

SurrogateMethod delta_method_tag(DeltaOrder order) {
  switch (order) {
    case DeltaOrder::first_marginal: return SurrogateMethod::delta1_waic_m;
    case DeltaOrder::first: return SurrogateMethod::delta1_waic;
    case DeltaOrder::second: return SurrogateMethod::delta2_waic;
  }
  throw InternalError("delta_method_tag: unknown order");
}

}  // namespace

SurrogateVector delta_waic_surrogate(std::span<const double> lpd_values,
                                     const PerObsDerivatives& derivs,
                                     const GaussianPosteriorSummary& posterior,
                                     DeltaOrder order) {
  posterior.validate();
  const std::int64_t n = static_cast<std::int64_t>(lpd_values.size());
  if (derivs.obs_count() != n)
    throw ValidationError("delta_waic_surrogate: derivative rows do not match "
                          "the number of observations");
  if (derivs.param_count() != posterior.mean.size())
    throw ValidationError("delta_waic_surrogate: derivative columns do not "
                          "match the posterior dimension");
  if (order == DeltaOrder::second &&
      static_cast<std::int64_t>(derivs.hessians.size()) != n)
    throw ValidationError("delta_waic_surrogate: order-2 approximation "
                          "requires one Hessian slice per observation");

  SurrogateVector s;
  s.method = delta_method_tag(order);
  s.draws_used = 0;
  s.values.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const Eigen::VectorXd g = derivs.gradients.row(i).transpose();
    const Eigen::MatrixXd* h =
        order == DeltaOrder::second
            ? &derivs.hessians[static_cast<std::size_t>(i)]
            : nullptr;
    s.values[static_cast<std::size_t>(i)] =
        lpd_values[static_cast<std::size_t>(i)] -
        delta_peff(g, h, posterior, order);
  }
  return s;
}

SurrogateVector delta_waic_surrogate(const LogLikMatrix& loglik,
                                     const PerObsDerivatives& derivs,
                                     const GaussianPosteriorSummary& posterior,
                                     DeltaOrder order, int threads) {
  const std::vector<double> lpd_values = lpd(loglik, threads);
  return delta_waic_surrogate(lpd_values, derivs, posterior, order);
}

SurrogateVector exact_surrogate(std::span<const double> exact_values) {
  check_finite(exact_values, "exact_surrogate");
  SurrogateVector s;
  s.values.assign(exact_values.begin(), exact_values.end());
  s.method = SurrogateMethod::exact;
  s.draws_used = 0;
  return s;
}

}  // namespace subloo
