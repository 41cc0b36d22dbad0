#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace subloo {

struct GpdFit {
  double k = 0.0;      // shape; -inf when the tail is degenerate (all equal)
  double sigma = 0.0;  // scale

  bool degenerate() const { return std::isinf(k) && k < 0.0; }
};

// Profile-likelihood fit of a generalized Pareto distribution to nonnegative
// exceedances sorted ascending (grid quadrature over the rate parameter,
// with a weak prior pulling the shape toward 0.5). Needs >= 5 points.
GpdFit gpd_fit_tail(std::span<const double> tail_ascending);

// Quantile of the fitted GPD at probability p in [0, 1).
double gpd_quantile(double p, double k, double sigma);

// Pareto-smooths the largest tail_len(S) importance ratios of a vector of
// log-ratios in place: the tail order statistics are replaced by expected
// order statistics of the fitted GPD, capped at the raw maximum. Returns the
// fitted shape, or -inf when the tail was degenerate and nothing changed.
double pareto_smooth_log_ratios(std::span<double> log_ratios);

// Tail size used by the smoother: min(ceil(0.2 S), ceil(3 sqrt(S))).
std::int64_t pareto_tail_len(std::int64_t draw_count);

}  // namespace subloo
