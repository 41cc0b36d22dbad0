#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "subloo/errors.hpp"
#include "subloo/psis.hpp"
#include "subloo/rng.hpp"

using namespace subloo;

namespace {

// exceedances of a GPD sample over any threshold are again GPD with the
// same shape, so quantile-transforming uniforms gives clean fit fixtures
std::vector<double> gpd_sample(std::size_t n, double k, double sigma,
                               Rng& rng) {
  std::vector<double> x(n);
  for (double& v : x) v = gpd_quantile(rng.next_double(), k, sigma);
  std::sort(x.begin(), x.end());
  return x;
}

}  // namespace

TEST_CASE("gpd_quantile closed forms") {
  CHECK(gpd_quantile(0.0, 0.3, 2.0) == 0.0);
  // k = 0 is the exponential distribution
  CHECK(gpd_quantile(0.5, 0.0, 1.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // hand evaluation at k = 0.5, sigma = 1: ((1-p)^{-1/2} - 1) / (1/2)
  const double p = 0.75;
  CHECK(gpd_quantile(p, 0.5, 1.0) ==
        doctest::Approx((std::pow(0.25, -0.5) - 1.0) / 0.5).epsilon(1e-12));
  CHECK_THROWS_AS(gpd_quantile(1.0, 0.1, 1.0), ValidationError);
}

TEST_CASE("gpd fit recovers an exponential tail (shape 0)") {
  Rng rng(100, 0);
  const std::vector<double> x = gpd_sample(1000, 0.0, 1.0, rng);
  const GpdFit fit = gpd_fit_tail(x);
  CHECK(fit.k > -0.1);
  CHECK(fit.k < 0.1);
  CHECK(fit.sigma > 0.8);
  CHECK(fit.sigma < 1.2);
}

TEST_CASE("gpd fit recovers a heavy tail (shape 0.7)") {
  Rng rng(101, 0);
  const std::vector<double> x = gpd_sample(1000, 0.7, 1.0, rng);
  const GpdFit fit = gpd_fit_tail(x);
  CHECK(fit.k > 0.55);
  CHECK(fit.k < 0.85);
}

TEST_CASE("gpd fit is deterministic") {
  Rng rng(102, 0);
  const std::vector<double> x = gpd_sample(500, 0.3, 2.0, rng);
  const GpdFit a = gpd_fit_tail(x);
  const GpdFit b = gpd_fit_tail(x);
  CHECK(a.k == b.k);
  CHECK(a.sigma == b.sigma);
}

TEST_CASE("degenerate all-equal tail returns the sentinel") {
  const std::vector<double> x(5, 1.25);
  const GpdFit fit = gpd_fit_tail(x);
  CHECK(fit.degenerate());
  const std::vector<double> zeros(8, 0.0);
  CHECK(gpd_fit_tail(zeros).degenerate());
}

TEST_CASE("gpd fit input validation") {
  CHECK_THROWS_AS(gpd_fit_tail(std::vector<double>{1.0, 2.0, 3.0, 4.0}),
                  ValidationError);
  CHECK_THROWS_AS(gpd_fit_tail(std::vector<double>{-0.1, 0.0, 1.0, 2.0, 3.0}),
                  ValidationError);
  CHECK_THROWS_AS(gpd_fit_tail(std::vector<double>{3.0, 2.0, 1.0, 4.0, 5.0}),
                  ValidationError);
}

TEST_CASE("pareto tail length rule") {
  CHECK(pareto_tail_len(25) == 5);    // ceil(0.2*25) = 5 wins
  CHECK(pareto_tail_len(100) == 20);  // ceil(0.2*100) = 20 vs ceil(30) = 30
  CHECK(pareto_tail_len(4000) == 190);  // ceil(3*sqrt(4000)) = 190 wins
}

TEST_CASE("smoothing leaves constant ratios untouched") {
  std::vector<double> lr(50, -1.25);
  const std::vector<double> before = lr;
  const double k = pareto_smooth_log_ratios(lr);
  CHECK(std::isinf(k));
  CHECK(k < 0.0);
  CHECK(lr == before);
}

TEST_CASE("smoothing shrinks the largest ratios and caps at the raw max") {
  Rng rng(103, 0);
  std::vector<double> lr(2000);
  for (double& v : lr) v = rng.next_normal() * 1.8;  // lognormal-ish ratios
  std::vector<double> before = lr;
  const double k = pareto_smooth_log_ratios(lr);
  CHECK(std::isfinite(k));

  const double raw_max =
      *std::max_element(before.begin(), before.end());
  double smoothed_max = -1e300;
  for (const double v : lr) smoothed_max = std::max(smoothed_max, v);
  CHECK(smoothed_max <= raw_max + 1e-12);

  // order statistics below the tail are untouched
  std::vector<std::size_t> idx(lr.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&before](std::size_t a, std::size_t b) {
    return before[a] < before[b];
  });
  const std::int64_t tail = pareto_tail_len(2000);
  for (std::size_t r = 0; r + static_cast<std::size_t>(tail) < idx.size(); ++r)
    CHECK(lr[idx[r]] == before[idx[r]]);
  // and the tail it replaced is monotone in the original order statistics
  for (std::size_t r = idx.size() - static_cast<std::size_t>(tail);
       r + 1 < idx.size(); ++r)
    CHECK(lr[idx[r]] <= lr[idx[r + 1]] + 1e-12);
}

TEST_CASE("smoothing recovers the tail shape of synthetic GPD ratios") {
  Rng rng(104, 1);
  // ratios = 0.1 + GPD(0.5) draws; tail exceedances keep shape 0.5
  std::vector<double> lr(4000);
  for (double& v : lr)
    v = std::log(0.1 + gpd_quantile(rng.next_double(), 0.5, 1.0));
  const double k = pareto_smooth_log_ratios(lr);
  CHECK(k > 0.35);
  CHECK(k < 0.65);
}
