#include "subloo/numerics.hpp"

#include <cmath>

#include "subloo/errors.hpp"
#include "subloo/kernels.hpp"

namespace subloo {

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw ValidationError("log_sum_exp: empty input");
  const auto& k = kernels::active();
  const double m = k.reduce_max(v.data(), v.size());
  return m + std::log(k.sum_exp(v.data(), v.size(), m));
}

double log_mean_exp(std::span<const double> v) {
  return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

double self_normalized_log_expectation(std::span<const double> log_f,
                                       std::span<const double> log_r) {
  if (log_f.size() != log_r.size())
    throw ValidationError(
        "self_normalized_log_expectation: length mismatch between values and "
        "log-weights");
  if (log_f.empty())
    throw ValidationError("self_normalized_log_expectation: empty input");
  const auto& k = kernels::active();
  const std::size_t n = log_f.size();
  const double m_num = k.reduce_max2(log_f.data(), log_r.data(), n);
  const double num =
      m_num + std::log(k.sum_exp2(log_f.data(), log_r.data(), n, m_num));
  const double m_den = k.reduce_max(log_r.data(), n);
  const double den = m_den + std::log(k.sum_exp(log_r.data(), n, m_den));
  return num - den;
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2)
    throw ValidationError("sample_variance: undefined for fewer than 2 values");
  const auto& k = kernels::active();
  const double mu = k.sum(v.data(), v.size()) / static_cast<double>(v.size());
  return k.sum_sq_dev(v.data(), v.size(), mu) /
         static_cast<double>(v.size() - 1);
}

double sum(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return kernels::active().sum(v.data(), v.size());
}

double mean(std::span<const double> v) {
  if (v.empty()) throw ValidationError("mean: empty input");
  return sum(v) / static_cast<double>(v.size());
}

}  // namespace subloo
