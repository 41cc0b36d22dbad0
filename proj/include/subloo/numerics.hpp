#pragma once

#include <span>

namespace subloo {

// Log-domain reductions backing every estimator in the library. All of them
// are pure, thread-safe, and shift-stabilized; sums are blocked pairwise so
// results do not depend on thread count.

// log sum_i exp(v[i]). Exact when all entries are equal.
double log_sum_exp(std::span<const double> v);

// log (1/S) sum_i exp(v[i])
double log_mean_exp(std::span<const double> v);

// log( sum_i exp(log_f[i] + log_r[i]) / sum_i exp(log_r[i]) ).
// Invariant under adding a constant to log_r.
double self_normalized_log_expectation(std::span<const double> log_f,
                                       std::span<const double> log_r);

// Unbiased sample variance, divisor (length - 1).
double sample_variance(std::span<const double> v);

double sum(std::span<const double> v);
double mean(std::span<const double> v);

}  // namespace subloo
