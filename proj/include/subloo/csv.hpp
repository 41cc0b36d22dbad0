#pragma once

#include <optional>
#include <string>
#include <vector>

#include "subloo/models.hpp"
#include "subloo/types.hpp"

namespace subloo::io {

// Shortest round-trip decimal form of a double (what every writer below
// uses, so exported values re-read bit-identically).
std::string format_double(double v);

// Writes content to path via a temp file and rename, so interrupted runs
// never leave partial output behind.
void write_file_atomic(const std::string& path, const std::string& content);

// Log-likelihood matrix CSV: header row of observation identifiers, one row
// per posterior draw. Parsed streaming, rejecting ragged rows, non-numeric
// cells and non-finite values with their row/column location.
struct LoglikCsv {
  LogLikMatrix matrix;
  std::vector<std::string> obs_ids;
};

LoglikCsv read_loglik_csv(const std::string& path);
void write_loglik_csv(const std::string& path, const LogLikMatrix& matrix,
                      const std::vector<std::string>& obs_ids);

// Per-observation value CSV: obs,value[,pareto_k].
struct ValueCsv {
  std::vector<std::string> obs_ids;
  std::vector<double> values;
  std::optional<std::vector<double>> pareto_k;
};

ValueCsv read_value_csv(const std::string& path);
void write_value_csv(const std::string& path, const ValueCsv& v);

// Dataset CSV, column order: y, x_1, ..., x_P. Metadata fields of the
// returned dataset (true coefficients, noise sd, target R^2) are not stored
// in the file and come back as neutral placeholders.
void write_dataset_csv(const std::string& path, const models::BlrDataset& d);
models::BlrDataset read_dataset_csv(const std::string& path);

// Draw matrix CSV, column order: beta_1, ..., beta_P, sigma2.
void write_draws_csv(const std::string& path, const Eigen::MatrixXd& draws);
Eigen::MatrixXd read_draws_csv(const std::string& path);

std::vector<std::string> default_obs_ids(std::int64_t n);

}  // namespace subloo::io
