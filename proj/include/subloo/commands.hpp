#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

namespace subloo::cli {

// Everything a subcommand needs, populated from flags with a flat key=value
// config file underneath (flags win). Seeds are mandatory wherever sampling
// happens; there is no wall-clock fallback.
struct RunConfig {
  // inputs
  std::string loglik;
  std::string loglik_b;
  std::string exact;
  std::string exact_b;
  std::string dataset;
  std::string dataset_b;
  std::string draws;
  std::string draws_b;

  std::string out;  // report path for most commands, directory for simulate

  std::string surrogate = "waic_s";
  std::int64_t draws_used = 0;  // 0 means all available draws
  std::int64_t m = 0;
  std::string scheme = "srs_wor";
  std::optional<std::uint64_t> seed;
  std::int64_t replicates = 0;
  int threads = 1;

  // simulate parameters
  std::int64_t sim_n = 0;
  std::int64_t sim_p = 0;
  double sim_r2 = 0.5;
  bool sim_sparse = false;
  std::int64_t sim_draws = 0;
  bool sim_nested_pair = false;
};

nlohmann::ordered_json cmd_simulate(const RunConfig& cfg);
nlohmann::ordered_json cmd_surrogate(const RunConfig& cfg);
nlohmann::ordered_json cmd_estimate(const RunConfig& cfg);
nlohmann::ordered_json cmd_compare(const RunConfig& cfg);
nlohmann::ordered_json cmd_replicate(const RunConfig& cfg);
nlohmann::ordered_json cmd_verify(const RunConfig& cfg);

// Dispatches, serializes (fixed key order, shortest-round-trip floats), and
// writes to cfg.out atomically or to stdout. Returns the process exit code.
int run_command(const std::string& command, const RunConfig& cfg);

}  // namespace subloo::cli
