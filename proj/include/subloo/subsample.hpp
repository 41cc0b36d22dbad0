#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace subloo {

enum class Scheme { srs_wor, srs_wr, pps_wr };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

// One drawn subsample. Immutable after creation; indices are 0-based.
// For pps_wr the per-draw probabilities of the whole population are kept so
// estimators can weight by the probability of each drawn unit.
struct SubsamplePlan {
  std::vector<std::int64_t> indices;
  Scheme scheme = Scheme::srs_wor;
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::optional<std::vector<double>> draw_probs;
  std::uint64_t seed = 0;
};

// Simple random sample without replacement via partial Fisher-Yates; every
// size-m subset is equally likely.
SubsamplePlan srs_wor(std::int64_t n, std::int64_t m, std::uint64_t seed);

// m independent uniform draws (with replacement).
SubsamplePlan srs_wr(std::int64_t n, std::int64_t m, std::uint64_t seed);

// m independent categorical draws proportional to probs; probs must be
// strictly positive and sum to 1 within 1e-12.
SubsamplePlan pps_wr(std::span<const double> probs, std::int64_t m,
                     std::uint64_t seed);

// Lexicographic enumeration of all C(n, m) without-replacement index sets,
// guarded at 1e6 subsets. Used as the exact-expectation oracle for the
// unbiasedness checks.
void enumerate_subsamples_wor(
    std::int64_t n, std::int64_t m,
    const std::function<void(std::span<const std::int64_t>)>& visit);

// C(n, m) as a double, with overflow saturating to +inf.
double binomial_coefficient(std::int64_t n, std::int64_t m);

}  // namespace subloo
