#include "subloo/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "subloo/errors.hpp"

namespace subloo::io {
namespace {

constexpr double kCellWarnThreshold = 1e8;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col,
                  const std::string& path) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw ValidationError(path + ": non-numeric cell at row " +
                          std::to_string(row) + ", column " +
                          std::to_string(col));
  if (!std::isfinite(value))
    throw ValidationError(path + ": non-finite value at row " +
                          std::to_string(row) + ", column " +
                          std::to_string(col));
  return value;
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");
  return in;
}

void warn_if_large(std::size_t cells, const std::string& path) {
  if (static_cast<double>(cells) > kCellWarnThreshold)
    std::cerr << "warning: " << path << " holds " << cells
              << " cells; consider a smaller draw count\n";
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  SUBLOO_CHECK(ec == std::errc{}, "format_double: to_chars failed");
  return std::string(buf, ptr);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw ValidationError("cannot open '" + tmp.string() +
                            "' for writing");
    out << content;
    if (!out.good())
      throw ValidationError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

LoglikCsv read_loglik_csv(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(path + ": empty file");
  LoglikCsv out;
  out.obs_ids = split_line(strip_cr(line));
  const std::size_t n = out.obs_ids.size();
  if (n == 0 || (n == 1 && out.obs_ids[0].empty()))
    throw ValidationError(path + ": header row carries no observation "
                          "identifiers");

  std::vector<double> cells;  // row-major staging
  std::size_t rows = 0;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != n)
      throw ValidationError(path + ": ragged row " +
                            std::to_string(row_number) + " has " +
                            std::to_string(fields.size()) + " cells, header "
                            "has " + std::to_string(n));
    for (std::size_t c = 0; c < n; ++c)
      cells.push_back(parse_cell(fields[c], row_number, c + 1, path));
    ++rows;
  }
  if (rows == 0) throw ValidationError(path + ": no draws below the header");
  warn_if_large(cells.size(), path);

  Eigen::MatrixXd m(rows, n);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < n; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          cells[r * n + c];
  out.matrix = LogLikMatrix::from_matrix(std::move(m));
  return out;
}

void write_loglik_csv(const std::string& path, const LogLikMatrix& matrix,
                      const std::vector<std::string>& obs_ids) {
  if (static_cast<std::int64_t>(obs_ids.size()) != matrix.obs_count())
    throw ValidationError("write_loglik_csv: id count does not match the "
                          "matrix");
  warn_if_large(static_cast<std::size_t>(matrix.values.size()), path);
  std::string body;
  body.reserve(static_cast<std::size_t>(matrix.values.size()) * 12);
  for (std::size_t c = 0; c < obs_ids.size(); ++c) {
    if (c) body += ',';
    body += obs_ids[c];
  }
  body += '\n';
  for (Eigen::Index s = 0; s < matrix.draw_count(); ++s) {
    for (Eigen::Index i = 0; i < matrix.obs_count(); ++i) {
      if (i) body += ',';
      body += format_double(matrix.values(s, i));
    }
    body += '\n';
  }
  write_file_atomic(path, body);
}

ValueCsv read_value_csv(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(path + ": empty file");
  const std::vector<std::string> header = split_line(strip_cr(line));
  if (header.size() < 2 || header[0] != "obs" || header[1] != "value")
    throw ValidationError(path + ": expected header 'obs,value[,pareto_k]'");
  const bool has_k = header.size() == 3 && header[2] == "pareto_k";
  if (header.size() > 2 && !has_k)
    throw ValidationError(path + ": unexpected extra columns in header");

  ValueCsv out;
  if (has_k) out.pareto_k.emplace();
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size())
      throw ValidationError(path + ": ragged row " +
                            std::to_string(row_number));
    out.obs_ids.push_back(fields[0]);
    out.values.push_back(parse_cell(fields[1], row_number, 2, path));
    if (has_k) {
      // pareto_k may be the degenerate-tail marker
      if (fields[2] == "-inf")
        out.pareto_k->push_back(-std::numeric_limits<double>::infinity());
      else
        out.pareto_k->push_back(parse_cell(fields[2], row_number, 3, path));
    }
  }
  if (out.values.empty()) throw ValidationError(path + ": no rows");
  return out;
}

void write_value_csv(const std::string& path, const ValueCsv& v) {
  if (v.obs_ids.size() != v.values.size() ||
      (v.pareto_k && v.pareto_k->size() != v.values.size()))
    throw ValidationError("write_value_csv: column length mismatch");
  std::string body = v.pareto_k ? "obs,value,pareto_k\n" : "obs,value\n";
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    body += v.obs_ids[i];
    body += ',';
    body += format_double(v.values[i]);
    if (v.pareto_k) {
      body += ',';
      const double k = (*v.pareto_k)[i];
      body += std::isinf(k) && k < 0 ? "-inf" : format_double(k);
    }
    body += '\n';
  }
  write_file_atomic(path, body);
}

void write_dataset_csv(const std::string& path, const models::BlrDataset& d) {
  std::string body = "y";
  for (Eigen::Index j = 0; j < d.design.cols(); ++j)
    body += ",x_" + std::to_string(j + 1);
  body += '\n';
  for (Eigen::Index i = 0; i < d.design.rows(); ++i) {
    body += format_double(d.response(i));
    for (Eigen::Index j = 0; j < d.design.cols(); ++j) {
      body += ',';
      body += format_double(d.design(i, j));
    }
    body += '\n';
  }
  write_file_atomic(path, body);
}

models::BlrDataset read_dataset_csv(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(path + ": empty file");
  const std::vector<std::string> header = split_line(strip_cr(line));
  if (header.size() < 2 || header[0] != "y")
    throw ValidationError(path + ": expected header 'y,x_1,...'");
  const std::size_t p = header.size() - 1;

  std::vector<double> ys;
  std::vector<double> xs;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size())
      throw ValidationError(path + ": ragged row " +
                            std::to_string(row_number));
    ys.push_back(parse_cell(fields[0], row_number, 1, path));
    for (std::size_t j = 0; j < p; ++j)
      xs.push_back(parse_cell(fields[j + 1], row_number, j + 2, path));
  }
  if (ys.empty()) throw ValidationError(path + ": no data rows");

  models::BlrDataset d;
  d.response = Eigen::Map<Eigen::VectorXd>(ys.data(),
                                           static_cast<Eigen::Index>(ys.size()));
  d.design.resize(static_cast<Eigen::Index>(ys.size()),
                  static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < ys.size(); ++i)
    for (std::size_t j = 0; j < p; ++j)
      d.design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          xs[i * p + j];
  d.true_beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  d.noise_sd = 1.0;
  d.target_r2 = 0.5;
  return d;
}

void write_draws_csv(const std::string& path, const Eigen::MatrixXd& draws) {
  if (draws.cols() < 2)
    throw ValidationError("write_draws_csv: draw matrix must have at least "
                          "beta_1 and sigma2 columns");
  std::string body;
  for (Eigen::Index j = 0; j + 1 < draws.cols(); ++j) {
    if (j) body += ',';
    body += "beta_" + std::to_string(j + 1);
  }
  body += ",sigma2\n";
  for (Eigen::Index s = 0; s < draws.rows(); ++s) {
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
      if (j) body += ',';
      body += format_double(draws(s, j));
    }
    body += '\n';
  }
  write_file_atomic(path, body);
}

Eigen::MatrixXd read_draws_csv(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(path + ": empty file");
  const std::vector<std::string> header = split_line(strip_cr(line));
  if (header.size() < 2 || header.back() != "sigma2")
    throw ValidationError(path + ": expected header 'beta_1,...,sigma2'");
  const std::size_t cols = header.size();

  std::vector<double> cells;
  std::size_t rows = 0;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != cols)
      throw ValidationError(path + ": ragged row " +
                            std::to_string(row_number));
    for (std::size_t j = 0; j < cols; ++j)
      cells.push_back(parse_cell(fields[j], row_number, j + 1, path));
    ++rows;
  }
  if (rows == 0) throw ValidationError(path + ": no draws");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          cells[r * cols + c];
  return m;
}

std::vector<std::string> default_obs_ids(std::int64_t n) {
  std::vector<std::string> ids(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i)
    ids[static_cast<std::size_t>(i)] = "obs_" + std::to_string(i + 1);
  return ids;
}

}  // namespace subloo::io
