#include "subloo/subsample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subloo/errors.hpp"
#include "subloo/rng.hpp"

namespace subloo {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::srs_wor: return "srs_wor";
    case Scheme::srs_wr: return "srs_wr";
    case Scheme::pps_wr: return "pps_wr";
  }
  throw InternalError("scheme_name: unknown scheme");
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "srs_wor") return Scheme::srs_wor;
  if (name == "srs_wr") return Scheme::srs_wr;
  if (name == "pps_wr") return Scheme::pps_wr;
  throw ValidationError("unknown sampling scheme '" + name +
                        "' (expected srs_wor, srs_wr or pps_wr)");
}

namespace {

void check_sizes(std::int64_t n, std::int64_t m, bool with_replacement) {
  if (n < 1) throw ValidationError("subsample: population size must be >= 1");
  if (m < 1) throw ValidationError("subsample: subsample size must be >= 1");
  if (!with_replacement && m > n)
    throw ValidationError("srs_wor: subsample size m=" + std::to_string(m) +
                          " exceeds population size n=" + std::to_string(n));
}

}  // namespace

SubsamplePlan srs_wor(std::int64_t n, std::int64_t m, std::uint64_t seed) {
  check_sizes(n, m, false);
  Rng rng = Rng::derive(seed, 0, "srs_wor");
  std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), std::int64_t{0});
  for (std::int64_t k = 0; k < m; ++k) {
    const std::int64_t j =
        k + static_cast<std::int64_t>(rng.next_below(
                static_cast<std::uint64_t>(n - k)));
    std::swap(pool[static_cast<std::size_t>(k)],
              pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(m));
  return SubsamplePlan{std::move(pool), Scheme::srs_wor, m, n, std::nullopt,
                       seed};
}

SubsamplePlan srs_wr(std::int64_t n, std::int64_t m, std::uint64_t seed) {
  check_sizes(n, m, true);
  Rng rng = Rng::derive(seed, 0, "srs_wr");
  std::vector<std::int64_t> idx(static_cast<std::size_t>(m));
  for (auto& v : idx)
    v = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(n)));
  return SubsamplePlan{std::move(idx), Scheme::srs_wr, m, n, std::nullopt,
                       seed};
}

SubsamplePlan pps_wr(std::span<const double> probs, std::int64_t m,
                     std::uint64_t seed) {
  const std::int64_t n = static_cast<std::int64_t>(probs.size());
  check_sizes(n, m, true);
  std::vector<double> cdf(probs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0.0) || !std::isfinite(probs[i]))
      throw ValidationError("pps_wr: draw probabilities must be strictly "
                            "positive and finite (index " +
                            std::to_string(i) + ")");
    total += probs[i];
    cdf[i] = total;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("pps_wr: draw probabilities must sum to 1 (got " +
                          std::to_string(total) + ")");
  cdf.back() = 1.0;

  Rng rng = Rng::derive(seed, 0, "pps_wr");
  std::vector<std::int64_t> idx(static_cast<std::size_t>(m));
  for (auto& v : idx) {
    const double u = rng.next_double();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    v = static_cast<std::int64_t>(std::min<std::ptrdiff_t>(
        it - cdf.begin(), static_cast<std::ptrdiff_t>(n - 1)));
  }
  return SubsamplePlan{std::move(idx), Scheme::pps_wr, m, n,
                       std::vector<double>(probs.begin(), probs.end()), seed};
}

double binomial_coefficient(std::int64_t n, std::int64_t m) {
  if (m < 0 || m > n) return 0.0;
  m = std::min(m, n - m);
  double c = 1.0;
  for (std::int64_t k = 1; k <= m; ++k)
    c *= static_cast<double>(n - m + k) / static_cast<double>(k);
  return c;
}

void enumerate_subsamples_wor(
    std::int64_t n, std::int64_t m,
    const std::function<void(std::span<const std::int64_t>)>& visit) {
  if (n < 1 || m < 1 || m > n)
    throw ValidationError("enumerate_subsamples_wor: need 1 <= m <= n");
  if (binomial_coefficient(n, m) > 1e6)
    throw ValidationError(
        "enumerate_subsamples_wor: C(n, m) exceeds the 1e6 guard; use "
        "Monte-Carlo sampling instead");

  std::vector<std::int64_t> subset(static_cast<std::size_t>(m));
  std::iota(subset.begin(), subset.end(), std::int64_t{0});
  for (;;) {
    visit(subset);
    // advance to the next combination in lexicographic order
    std::int64_t k = m - 1;
    while (k >= 0 && subset[static_cast<std::size_t>(k)] == n - m + k) --k;
    if (k < 0) return;
    ++subset[static_cast<std::size_t>(k)];
    for (std::int64_t j = k + 1; j < m; ++j)
      subset[static_cast<std::size_t>(j)] =
          subset[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace subloo
