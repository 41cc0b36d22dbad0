#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "doctest.h"
#include "subloo/csv.hpp"
#include "subloo/errors.hpp"
#include "subloo/models.hpp"
#include "subloo/rng.hpp"

using namespace subloo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("subloo_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
  static int counter;
};

int TempDir::counter = 0;

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("loglik CSV round-trips bit-identically") {
  TempDir dir;
  Eigen::MatrixXd m(2, 3);
  m << -1.5, -0.1234567890123456, -3e-17, -700.25, -2.0 / 3.0, -1e300;
  const LogLikMatrix matrix = LogLikMatrix::from_matrix(m);
  const std::vector<std::string> ids = {"a", "b", "c"};
  const std::string path = dir.file("ll.csv");
  io::write_loglik_csv(path, matrix, ids);

  const io::LoglikCsv redo = io::read_loglik_csv(path);
  CHECK(redo.obs_ids == ids);
  CHECK(redo.matrix.values == matrix.values);
  CHECK_FALSE(fs::exists(path + ".tmp"));
}

TEST_CASE("a large synthetic loglik file parses back exactly") {
  TempDir dir;
  Rng rng(3, 3);
  Eigen::MatrixXd m(4000, 1000);
  for (Eigen::Index s = 0; s < m.rows(); ++s)
    for (Eigen::Index i = 0; i < m.cols(); ++i)
      m(s, i) = -2.0 + rng.next_normal();
  const LogLikMatrix matrix = LogLikMatrix::from_matrix(std::move(m));
  const std::string path = dir.file("big.csv");
  io::write_loglik_csv(path, matrix, io::default_obs_ids(1000));
  const io::LoglikCsv redo = io::read_loglik_csv(path);
  CHECK(redo.matrix.values == matrix.values);
}

TEST_CASE("loglik CSV rejects malformed input with locations") {
  TempDir dir;
  const std::string p1 = dir.file("headeronly.csv");
  write_text(p1, "obs_1,obs_2\n");
  CHECK_THROWS_WITH_AS(io::read_loglik_csv(p1), doctest::Contains("no draws"),
                       ValidationError);

  const std::string p2 = dir.file("ragged.csv");
  write_text(p2, "a,b\n1.0,2.0\n1.0\n");
  CHECK_THROWS_WITH_AS(io::read_loglik_csv(p2), doctest::Contains("row 3"),
                       ValidationError);

  const std::string p3 = dir.file("nonnum.csv");
  write_text(p3, "a,b\n1.0,zzz\n");
  CHECK_THROWS_WITH_AS(io::read_loglik_csv(p3), doctest::Contains("column 2"),
                       ValidationError);

  const std::string p4 = dir.file("nonfinite.csv");
  write_text(p4, "a,b\n1.0,nan\n");
  CHECK_THROWS_WITH_AS(io::read_loglik_csv(p4),
                       doctest::Contains("non-finite"), ValidationError);

  const std::string p5 = dir.file("inf.csv");
  write_text(p5, "a,b\n1.0,inf\n");
  CHECK_THROWS_AS(io::read_loglik_csv(p5), ValidationError);

  CHECK_THROWS_AS(io::read_loglik_csv(dir.file("missing.csv")),
                  ValidationError);
}

TEST_CASE("value CSV round-trips, including the degenerate-tail marker") {
  TempDir dir;
  io::ValueCsv v;
  v.obs_ids = {"obs_1", "obs_2", "obs_3"};
  v.values = {-1.25, -0.5, -2.0 / 3.0};
  v.pareto_k = std::vector<double>{
      0.31, -std::numeric_limits<double>::infinity(), 0.69};
  const std::string path = dir.file("values.csv");
  io::write_value_csv(path, v);

  const io::ValueCsv redo = io::read_value_csv(path);
  CHECK(redo.obs_ids == v.obs_ids);
  CHECK(redo.values == v.values);
  REQUIRE(redo.pareto_k.has_value());
  CHECK((*redo.pareto_k)[0] == 0.31);
  CHECK(std::isinf((*redo.pareto_k)[1]));
  CHECK((*redo.pareto_k)[2] == 0.69);

  io::ValueCsv plain;
  plain.obs_ids = {"x"};
  plain.values = {1.0};
  io::write_value_csv(dir.file("plain.csv"), plain);
  const io::ValueCsv redo2 = io::read_value_csv(dir.file("plain.csv"));
  CHECK_FALSE(redo2.pareto_k.has_value());
}

TEST_CASE("dataset and draws CSVs round-trip") {
  TempDir dir;
  const models::BlrDataset d = models::simulate_blr(25, 3, 0.5, false, 2);
  io::write_dataset_csv(dir.file("data.csv"), d);
  const models::BlrDataset redo = io::read_dataset_csv(dir.file("data.csv"));
  CHECK(redo.design == d.design);
  CHECK(redo.response == d.response);

  const models::ConjugateBlrPosterior post =
      models::fit_conjugate_blr(d, models::NigPrior{});
  const Eigen::MatrixXd draws = models::draw_posterior(post, 40, 1);
  io::write_draws_csv(dir.file("draws.csv"), draws);
  CHECK(io::read_draws_csv(dir.file("draws.csv")) == draws);
}

TEST_CASE("format_double produces shortest round-trip forms") {
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(-1.0 / 3.0) == "-0.3333333333333333");
  CHECK(io::format_double(1e300) == "1e+300");
}
