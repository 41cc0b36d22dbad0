#include <cmath>
#include <vector>

#include "doctest.h"
#include "subloo/errors.hpp"
#include "subloo/estimators.hpp"
#include "subloo/models.hpp"
#include "subloo/numerics.hpp"
#include "subloo/rng.hpp"
#include "subloo/subsample.hpp"
#include "subloo/surrogates.hpp"

using namespace subloo;

namespace {

SurrogateVector as_surrogate(std::vector<double> v) {
  SurrogateVector s;
  s.values = std::move(v);
  s.method = SurrogateMethod::exact;
  return s;
}

SubsamplePlan manual_plan(std::vector<std::int64_t> idx, std::int64_t n,
                          Scheme scheme = Scheme::srs_wor) {
  SubsamplePlan p;
  p.m = static_cast<std::int64_t>(idx.size());
  p.indices = std::move(idx);
  p.n = n;
  p.scheme = scheme;
  return p;
}

std::vector<double> values_at(const std::vector<double>& pi,
                              const SubsamplePlan& plan) {
  std::vector<double> out(plan.indices.size());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = pi[static_cast<std::size_t>(plan.indices[j])];
  return out;
}

std::vector<double> random_vector(std::size_t n, Rng& rng, double scale = 1.0,
                                  double shift = 0.0) {
  std::vector<double> v(n);
  for (double& x : v) x = shift + scale * rng.next_normal();
  return v;
}

double population_variance(const std::vector<double>& v) {
  const double mu = mean(v);
  double acc = 0.0;
  for (const double x : v) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(v.size());
}

struct EnumerationStats {
  double mean_est = 0.0;
  double mean_var = 0.0;
  double mean_sigma2_raw = 0.0;
  double var_of_est = 0.0;  // divisor C(n, m)
};

EnumerationStats enumerate_diff(const std::vector<double>& pi,
                                const SurrogateVector& surr, std::int64_t m) {
  const std::int64_t n = static_cast<std::int64_t>(pi.size());
  std::vector<double> ests;
  EnumerationStats st;
  enumerate_subsamples_wor(n, m, [&](std::span<const std::int64_t> s) {
    const SubsamplePlan plan =
        manual_plan({s.begin(), s.end()}, n, Scheme::srs_wor);
    const std::vector<double> exact_s = values_at(pi, plan);
    const double est = diff_elpd(surr, exact_s, plan);
    const double var = diff_variance(surr, exact_s, plan);
    st.mean_est += est;
    st.mean_var += var;
    st.mean_sigma2_raw += diff_sigma2_loo(surr, exact_s, plan, est, var).raw;
    ests.push_back(est);
  });
  const double count = static_cast<double>(ests.size());
  st.mean_est /= count;
  st.mean_var /= count;
  st.mean_sigma2_raw /= count;
  for (const double e : ests)
    st.var_of_est += (e - st.mean_est) * (e - st.mean_est);
  st.var_of_est /= count;
  return st;
}

}  // namespace

TEST_CASE("diff_elpd with a zero-residual surrogate returns the exact total "
          "for any plan") {
  Rng rng(1, 0);
  const std::vector<double> pi = random_vector(40, rng, 2.0, -3.0);
  const SurrogateVector surr = as_surrogate(pi);
  for (const std::uint64_t seed : {0ull, 1ull, 2ull}) {
    const SubsamplePlan plan = srs_wor(40, 7, seed);
    CHECK(diff_elpd(surr, values_at(pi, plan), plan) == sum(pi));
  }
}

TEST_CASE("diff_elpd hand case") {
  const SurrogateVector surr = as_surrogate({0.0, 0.0, 0.0, 0.0});
  const SubsamplePlan plan = manual_plan({0, 2}, 4);
  const std::vector<double> exact_s = {1.0, 3.0};
  CHECK(diff_elpd(surr, exact_s, plan) == 8.0);
}

TEST_CASE("diff_elpd errors on misaligned exact values and pps plans") {
  const SurrogateVector surr = as_surrogate({0.0, 0.0, 0.0});
  const SubsamplePlan plan = manual_plan({0, 1}, 3);
  CHECK_THROWS_AS(diff_elpd(surr, std::vector<double>{1.0}, plan),
                  ValidationError);
  const SubsamplePlan pps = manual_plan({0, 1}, 3, Scheme::pps_wr);
  CHECK_THROWS_AS(diff_elpd(surr, std::vector<double>{1.0, 2.0}, pps),
                  ValidationError);
}

TEST_CASE("enumeration certifies unbiasedness of the difference estimator") {
  Rng rng(2, 0);
  const std::vector<double> pi = random_vector(8, rng, 1.5);
  std::vector<double> approx = pi;
  for (double& x : approx) x += 0.7 * rng.next_normal();
  const EnumerationStats st = enumerate_diff(pi, as_surrogate(approx), 3);
  CHECK(st.mean_est == doctest::Approx(sum(pi)).epsilon(1e-10));
}

TEST_CASE("diff_variance is zero for zero residuals and at m = n") {
  Rng rng(3, 0);
  const std::vector<double> pi = random_vector(12, rng);
  const SurrogateVector surr = as_surrogate(pi);
  const SubsamplePlan partial = srs_wor(12, 5, 0);
  CHECK(diff_variance(surr, values_at(pi, partial), partial) == 0.0);

  std::vector<double> approx = pi;
  for (double& x : approx) x += rng.next_normal();
  const SubsamplePlan full = srs_wor(12, 12, 0);
  CHECK(diff_variance(as_surrogate(approx), values_at(pi, full), full) == 0.0);
}

TEST_CASE("enumeration mean of the variance formula equals the enumeration "
          "variance of the estimator") {
  Rng rng(4, 0);
  const std::vector<double> pi = random_vector(8, rng, 2.0);
  std::vector<double> approx = pi;
  for (double& x : approx) x += 0.5 * rng.next_normal();
  const EnumerationStats st = enumerate_diff(pi, as_surrogate(approx), 3);
  CHECK(st.mean_var == doctest::Approx(st.var_of_est).epsilon(1e-10));
}

TEST_CASE("diff_variance demands m >= 2 and the matching scheme") {
  const SurrogateVector surr = as_surrogate({1.0, 2.0, 3.0});
  const SubsamplePlan one = manual_plan({1}, 3);
  CHECK_THROWS_AS(diff_variance(surr, std::vector<double>{2.0}, one),
                  ValidationError);
  const SubsamplePlan wr = manual_plan({0, 1}, 3, Scheme::srs_wr);
  CHECK_THROWS_WITH_AS(diff_variance(surr, std::vector<double>{1.0, 2.0}, wr),
                       doctest::Contains("diff_variance_wr"), ValidationError);
  const SubsamplePlan wor = manual_plan({0, 1}, 3, Scheme::srs_wor);
  CHECK_THROWS_AS(diff_variance_wr(surr, std::vector<double>{1.0, 2.0}, wor),
                  ValidationError);
}

TEST_CASE("residual scaling laws") {
  Rng rng(5, 0);
  const std::vector<double> pi = random_vector(30, rng, 2.0);
  std::vector<double> resid = random_vector(30, rng, 1.0);
  const SubsamplePlan plan = srs_wor(30, 10, 3);

  const auto variance_with_scale = [&](double c) {
    std::vector<double> approx(pi.size());
    for (std::size_t i = 0; i < pi.size(); ++i) approx[i] = pi[i] - c * resid[i];
    return diff_variance(as_surrogate(approx), values_at(pi, plan), plan);
  };

  const double base = variance_with_scale(1.0);
  // power-of-two scaling is exact in floating point
  CHECK(variance_with_scale(2.0) == 4.0 * base);
  CHECK(variance_with_scale(3.0) == doctest::Approx(9.0 * base).epsilon(1e-12));
  // V is O(eps^2) as the surrogate approaches the exact values
  for (const double eps : {1.0, 0.1, 0.01}) {
    CHECK(variance_with_scale(eps) ==
          doctest::Approx(eps * eps * base).epsilon(1e-10));
  }
}

TEST_CASE("sigma2_loo: zero-residual full sample recovers the population "
          "variance exactly") {
  Rng rng(6, 0);
  const std::vector<double> pi = random_vector(25, rng, 1.3, -2.0);
  const SurrogateVector surr = as_surrogate(pi);
  const SubsamplePlan full = srs_wor(25, 25, 1);
  const std::vector<double> exact_s = values_at(pi, full);
  const double est = diff_elpd(surr, exact_s, full);
  const double var = diff_variance(surr, exact_s, full);
  const Sigma2Loo s2 = diff_sigma2_loo(surr, exact_s, full, est, var);
  CHECK(s2.raw == doctest::Approx(population_variance(pi)).epsilon(1e-12));
  CHECK_FALSE(s2.degenerate);
}

TEST_CASE("sigma2_loo enumeration mean is zero for constant values") {
  Rng rng(7, 0);
  const std::vector<double> pi(8, -1.7);
  const std::vector<double> approx = random_vector(8, rng);
  const EnumerationStats st = enumerate_diff(pi, as_surrogate(approx), 3);
  CHECK(std::abs(st.mean_sigma2_raw) < 1e-10);
}

TEST_CASE("sigma2_loo enumeration mean equals the population variance") {
  Rng rng(8, 0);
  const std::vector<double> pi = random_vector(8, rng, 2.0, 1.0);
  std::vector<double> approx = pi;
  for (double& x : approx) x += 0.6 * rng.next_normal();
  const EnumerationStats st = enumerate_diff(pi, as_surrogate(approx), 3);
  CHECK(st.mean_sigma2_raw ==
        doctest::Approx(population_variance(pi)).epsilon(1e-10));
}

TEST_CASE("with-replacement difference estimator is unbiased (Monte Carlo)") {
  Rng rng(9, 0);
  const std::vector<double> pi = random_vector(15, rng, 1.0);
  std::vector<double> approx = pi;
  for (double& x : approx) x += 0.5 * rng.next_normal();
  const SurrogateVector surr = as_surrogate(approx);

  const int reps = 200000;
  double acc = 0.0, acc2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const SubsamplePlan plan = srs_wr(15, 4, static_cast<std::uint64_t>(r));
    const double est = diff_elpd(surr, values_at(pi, plan), plan);
    acc += est;
    acc2 += est * est;
  }
  const double mc_mean = acc / reps;
  const double mc_sd = std::sqrt((acc2 / reps - mc_mean * mc_mean) / reps);
  CHECK(std::abs(mc_mean - sum(pi)) < 4.0 * mc_sd);
}

TEST_CASE("hh_elpd with uniform probabilities reduces to the expansion "
          "estimator") {
  const std::vector<double> pi = {1.0, -2.0, 0.5, 3.0};
  std::vector<double> probs(4, 0.25);
  SubsamplePlan plan = manual_plan({0, 3}, 4, Scheme::pps_wr);
  plan.draw_probs = probs;
  const std::vector<double> exact_s = {1.0, 3.0};
  CHECK(hh_elpd(exact_s, plan) == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("hh estimator has zero variance at exactly proportional "
          "probabilities") {
  Rng rng(10, 0);
  std::vector<double> pi = random_vector(8, rng, 0.5, 3.0);  // positive
  const double total = sum(pi);
  std::vector<double> probs(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) probs[i] = pi[i] / total;

  for (const std::uint64_t seed : {0ull, 5ull, 9ull}) {
    const SubsamplePlan plan = pps_wr(probs, 3, seed);
    const std::vector<double> exact_s = values_at(pi, plan);
    CHECK(hh_elpd(exact_s, plan) == doctest::Approx(total).epsilon(1e-12));
    CHECK(hh_variance(exact_s, plan) ==
          doctest::Approx(0.0).scale(total * total).epsilon(1e-20));
  }
}

TEST_CASE("hh_variance is zero for constant values under uniform "
          "probabilities") {
  const std::vector<double> probs(6, 1.0 / 6.0);
  const SubsamplePlan plan = pps_wr(probs, 4, 0);
  const std::vector<double> exact_s(4, -2.5);
  CHECK(hh_variance(exact_s, plan) == 0.0);
}

TEST_CASE("hh estimator Monte-Carlo unbiasedness and variance formula") {
  Rng rng(11, 0);
  const std::vector<double> pi = random_vector(8, rng, 1.0, -4.0);
  std::vector<double> probs(pi.size());
  double total_abs = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) total_abs += std::abs(pi[i]);
  for (std::size_t i = 0; i < pi.size(); ++i)
    probs[i] = std::abs(pi[i]) / total_abs;

  const int reps = 1000000;
  double acc = 0.0, acc2 = 0.0, acc_var = 0.0;
  for (int r = 0; r < reps; ++r) {
    const SubsamplePlan plan = pps_wr(probs, 3, static_cast<std::uint64_t>(r));
    const std::vector<double> exact_s = values_at(pi, plan);
    const double est = hh_elpd(exact_s, plan);
    acc += est;
    acc2 += est * est;
    acc_var += hh_variance(exact_s, plan);
  }
  const double mc_mean = acc / reps;
  const double emp_var = acc2 / reps - mc_mean * mc_mean;
  const double mc_sd = std::sqrt(emp_var / reps);
  CHECK(std::abs(mc_mean - sum(pi)) < 4.0 * mc_sd);
  CHECK(acc_var / reps == doctest::Approx(emp_var).epsilon(0.05));
}

TEST_CASE("estimate_model bundles the right pieces per scheme") {
  Rng rng(12, 0);
  const std::vector<double> pi = random_vector(20, rng, 1.0, -2.0);
  const SurrogateVector surr = as_surrogate(pi);

  const SubsamplePlan full = srs_wor(20, 20, 3);
  const ElpdEstimate est = estimate_model(surr, values_at(pi, full), full);
  CHECK(est.elpd_hat == sum(pi));
  CHECK(est.se_subsampling == 0.0);
  REQUIRE(est.sigma_loo_hat.has_value());
  CHECK(*est.sigma_loo_hat ==
        doctest::Approx(std::sqrt(population_variance(pi))).epsilon(1e-12));
  CHECK(est.estimator == EstimatorKind::diff);

  // determinism
  const ElpdEstimate est2 = estimate_model(surr, values_at(pi, full), full);
  CHECK(est.elpd_hat == est2.elpd_hat);
  CHECK(est.se_subsampling == est2.se_subsampling);

  std::vector<double> probs(20, 0.05);
  const SubsamplePlan pps = pps_wr(probs, 5, 4);
  const ElpdEstimate hh = estimate_model(surr, values_at(pi, pps), pps);
  CHECK(hh.estimator == EstimatorKind::hh);
  CHECK_FALSE(hh.sigma_loo_hat.has_value());
}

TEST_CASE("estimate_model on a with-replacement plan drops the finite "
          "population correction") {
  Rng rng(14, 0);
  const std::vector<double> pi = random_vector(20, rng, 1.0, -2.0);
  std::vector<double> approx = pi;
  for (double& x : approx) x += 0.4 * rng.next_normal();
  const SurrogateVector surr = as_surrogate(approx);
  const SubsamplePlan plan = srs_wr(20, 6, 5);
  const ElpdEstimate est = estimate_model(surr, values_at(pi, plan), plan);
  CHECK(est.estimator == EstimatorKind::diff);
  CHECK(est.se_subsampling ==
        std::sqrt(diff_variance_wr(surr, values_at(pi, plan), plan)));
  // no fpc: the WOR variance on the same residuals would be smaller
  const SubsamplePlan wor = manual_plan(plan.indices, 20, Scheme::srs_wor);
  CHECK(diff_variance_wr(surr, values_at(pi, plan), plan) >
        diff_variance(surr, values_at(pi, wor), wor));
}

TEST_CASE("compare_models is antisymmetric and exact on self-comparison") {
  Rng rng(13, 0);
  const std::vector<double> pi_a = random_vector(30, rng, 1.0, -2.0);
  std::vector<double> pi_b = pi_a;
  for (double& x : pi_b) x += 0.3 * rng.next_normal();
  std::vector<double> surr_a_v = pi_a;
  std::vector<double> surr_b_v = pi_b;
  for (double& x : surr_a_v) x += 0.2 * rng.next_normal();
  for (double& x : surr_b_v) x += 0.2 * rng.next_normal();
  const SurrogateVector surr_a = as_surrogate(surr_a_v);
  const SurrogateVector surr_b = as_surrogate(surr_b_v);

  const SubsamplePlan plan = srs_wor(30, 10, 7);
  const std::vector<double> ex_a = values_at(pi_a, plan);
  const std::vector<double> ex_b = values_at(pi_b, plan);

  const ComparisonResult ab = compare_models(surr_a, surr_b, ex_a, ex_b, plan);
  const ComparisonResult ba = compare_models(surr_b, surr_a, ex_b, ex_a, plan);
  CHECK(ab.elpd_d_hat == -ba.elpd_d_hat);
  CHECK(ab.se_d == ba.se_d);
  CHECK(ab.sigma_d_hat == ba.sigma_d_hat);

  const ComparisonResult self =
      compare_models(surr_a, surr_a, ex_a, ex_a, plan);
  CHECK(self.elpd_d_hat == 0.0);
  CHECK(self.se_d == 0.0);
  CHECK(self.sigma_d_hat == 0.0);

  // comparing against an all-zero model reduces to estimate_model
  const SurrogateVector zero = as_surrogate(std::vector<double>(30, 0.0));
  const std::vector<double> ex_zero(10, 0.0);
  const ComparisonResult vs_zero =
      compare_models(surr_a, zero, ex_a, ex_zero, plan);
  const ElpdEstimate alone = estimate_model(surr_a, ex_a, plan);
  CHECK(vs_zero.elpd_d_hat == alone.elpd_hat);
  CHECK(vs_zero.se_d == alone.se_subsampling);
}

TEST_CASE("compare_models rejects mismatched models and pps plans") {
  const SurrogateVector a = as_surrogate({1.0, 2.0});
  const SurrogateVector b = as_surrogate({1.0, 2.0, 3.0});
  const SubsamplePlan plan = manual_plan({0}, 2);
  CHECK_THROWS_AS(compare_models(a, b, std::vector<double>{1.0},
                                 std::vector<double>{1.0}, plan),
                  ValidationError);
  std::vector<double> probs = {0.5, 0.5};
  const SubsamplePlan pps = pps_wr(probs, 2, 0);
  CHECK_THROWS_AS(compare_models(a, a, std::vector<double>{1.0, 1.0},
                                 std::vector<double>{1.0, 1.0}, pps),
                  ValidationError);
}

TEST_CASE("difference estimator covers the oracle total on a conjugate "
          "regression fixture") {
  // n=1000, m=100, WAIC surrogate: the estimate should sit within
  // 4 reported SEs of the exact total in at least 95 of 100 seeded plans
  const models::BlrDataset data = models::simulate_blr(1000, 5, 0.7, false, 42);
  const models::NigPrior prior;
  const models::ConjugateBlrPosterior post =
      models::fit_conjugate_blr(data, prior);
  const Eigen::MatrixXd draws = models::draw_posterior(post, 4000, 7);
  const LogLikMatrix ll = models::loglik_matrix(data, draws);
  const SurrogateVector surr = waic_surrogate(ll, 4000, 2);
  const std::vector<double> exact = models::exact_loo_blr(data, prior, 2);
  const double oracle_total = sum(exact);

  int covered = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const SubsamplePlan plan =
        srs_wor(1000, 100, static_cast<std::uint64_t>(seed));
    const ElpdEstimate est =
        estimate_model(surr, values_at(exact, plan), plan);
    if (std::abs(est.elpd_hat - oracle_total) <= 4.0 * est.se_subsampling)
      ++covered;
  }
  CHECK(covered >= 95);
}
