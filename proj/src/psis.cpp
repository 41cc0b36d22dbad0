#include "subloo/psis.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "subloo/errors.hpp"
#include "subloo/numerics.hpp"

namespace subloo {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

GpdFit gpd_fit_tail(std::span<const double> x) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  if (n < 5)
    throw ValidationError("gpd_fit_tail: need at least 5 tail points");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0)
      throw ValidationError("gpd_fit_tail: exceedances must be nonnegative");
    if (i > 0 && x[i] < x[i - 1])
      throw ValidationError("gpd_fit_tail: tail must be sorted ascending");
  }
  const double x_max = x.back();
  if (!(x_max > x.front())) return {kNegInf, 0.0};  // all equal: nothing to fit

  // Grid over the rate b = shape/scale, weighted by profile likelihood.
  const std::int64_t grid =
      30 + static_cast<std::int64_t>(std::floor(std::sqrt(n)));
  double x_quart =
      x[static_cast<std::size_t>(std::floor(n / 4.0 + 0.5)) - 1];
  if (!(x_quart > 0.0)) x_quart = x_max / 2.0;

  const auto shape_at = [&x](double b) {
    double acc = 0.0;
    for (const double xi : x) acc += std::log1p(b * xi);
    return acc / static_cast<double>(x.size());
  };
  const double mean_x =
      std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);

  std::vector<double> b_grid(static_cast<std::size_t>(grid));
  std::vector<double> log_lik(static_cast<std::size_t>(grid));
  for (std::int64_t j = 1; j <= grid; ++j) {
    const double b =
        -(1.0 / x_max + (1.0 - std::sqrt(static_cast<double>(grid) /
                                         (static_cast<double>(j) - 0.5))) /
                            (3.0 * x_quart));
    double l;
    if (b == 0.0) {
      l = static_cast<double>(n) * (-std::log(mean_x) - 1.0);
    } else {
      const double xi = shape_at(b);
      l = static_cast<double>(n) * (std::log(b / xi) - xi - 1.0);
    }
    b_grid[static_cast<std::size_t>(j - 1)] = b;
    log_lik[static_cast<std::size_t>(j - 1)] = l;
  }

  const double norm = log_sum_exp(log_lik);
  double b_hat = 0.0;
  for (std::size_t j = 0; j < b_grid.size(); ++j)
    b_hat += b_grid[j] * std::exp(log_lik[j] - norm);

  double k_raw, sigma;
  if (b_hat == 0.0) {
    k_raw = 0.0;
    sigma = mean_x;
  } else {
    k_raw = shape_at(b_hat);
    sigma = k_raw / b_hat;
  }
  // weakly informative prior on the shape, as in the Zhang-Stephens scheme
  const double k_hat =
      (static_cast<double>(n) * k_raw + 5.0) / (static_cast<double>(n) + 10.0);
  return {k_hat, sigma};
}

double gpd_quantile(double p, double k, double sigma) {
  if (!(p >= 0.0 && p < 1.0))
    throw ValidationError("gpd_quantile: p must lie in [0, 1)");
  const double log1mp = std::log1p(-p);
  if (std::abs(k) < 1e-12) return -sigma * log1mp;
  return sigma * std::expm1(-k * log1mp) / k;
}

std::int64_t pareto_tail_len(std::int64_t draw_count) {
  const double s = static_cast<double>(draw_count);
  return static_cast<std::int64_t>(
      std::min(std::ceil(0.2 * s), std::ceil(3.0 * std::sqrt(s))));
}

double pareto_smooth_log_ratios(std::span<double> log_ratios) {
  const std::int64_t s = static_cast<std::int64_t>(log_ratios.size());
  const std::int64_t tail = pareto_tail_len(s);
  if (tail < 5 || tail >= s)
    throw ValidationError("pareto_smooth_log_ratios: too few draws for a "
                          "tail fit");

  std::vector<std::int64_t> order(static_cast<std::size_t>(s));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&log_ratios](std::int64_t a, std::int64_t b) {
                     return log_ratios[static_cast<std::size_t>(a)] <
                            log_ratios[static_cast<std::size_t>(b)];
                   });

  // Work on the ratio scale relative to the max ratio; the self-normalized
  // estimate downstream is shift-invariant so no un-scaling is needed.
  const double log_max =
      log_ratios[static_cast<std::size_t>(order.back())];
  const double cutoff = std::exp(
      log_ratios[static_cast<std::size_t>(order[static_cast<std::size_t>(
          s - tail - 1)])] -
      log_max);

  std::vector<double> exceedances(static_cast<std::size_t>(tail));
  for (std::int64_t t = 0; t < tail; ++t) {
    const double w = std::exp(
        log_ratios[static_cast<std::size_t>(
            order[static_cast<std::size_t>(s - tail + t)])] -
        log_max);
    exceedances[static_cast<std::size_t>(t)] = std::max(0.0, w - cutoff);
  }

  const GpdFit fit = gpd_fit_tail(exceedances);
  if (fit.degenerate()) return fit.k;

  for (std::int64_t t = 0; t < tail; ++t) {
    const double p =
        (static_cast<double>(t) + 0.5) / static_cast<double>(tail);
    const double w =
        std::min(cutoff + gpd_quantile(p, fit.k, fit.sigma), 1.0);
    log_ratios[static_cast<std::size_t>(
        order[static_cast<std::size_t>(s - tail + t)])] =
        std::log(w) + log_max;
  }
  return fit.k;
}

}  // namespace subloo
