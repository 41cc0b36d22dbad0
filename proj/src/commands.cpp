#include "subloo/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <unordered_map>

#include "subloo/csv.hpp"
#include "subloo/errors.hpp"
#include "subloo/estimators.hpp"
#include "subloo/models.hpp"
#include "subloo/numerics.hpp"
#include "subloo/parallel.hpp"
#include "subloo/rng.hpp"
#include "subloo/subsample.hpp"
#include "subloo/surrogates.hpp"

namespace subloo::cli {

using json = nlohmann::ordered_json;

namespace {

std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed)
    throw ValidationError("--seed is required; there is no wall-clock "
                          "default");
  return *cfg.seed;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty())
    throw ValidationError(std::string("missing required input: ") + what);
  if (!std::filesystem::exists(path))
    throw ValidationError(std::string(what) + " file '" + path +
                          "' does not exist");
}

struct ModelInputs {
  io::LoglikCsv loglik;
  std::optional<models::BlrDataset> dataset;
  std::optional<Eigen::MatrixXd> draws;
  std::unordered_map<std::string, double> exact_by_id;
};

ModelInputs load_model(const std::string& loglik_path,
                       const std::string& dataset_path,
                       const std::string& draws_path,
                       const std::string& exact_path) {
  ModelInputs in;
  if (!dataset_path.empty()) {
    require_file(dataset_path, "dataset");
    in.dataset = io::read_dataset_csv(dataset_path);
  }
  if (!draws_path.empty()) {
    require_file(draws_path, "draws");
    in.draws = io::read_draws_csv(draws_path);
    if (in.dataset && in.draws->cols() != in.dataset->p() + 1)
      throw ValidationError("draws file width does not match the dataset "
                            "(expected p + 1 columns)");
  }
  if (!loglik_path.empty()) {
    require_file(loglik_path, "loglik");
    in.loglik = io::read_loglik_csv(loglik_path);
  } else if (in.dataset && in.draws) {
    in.loglik.matrix = models::loglik_matrix(*in.dataset, *in.draws);
    in.loglik.obs_ids = io::default_obs_ids(in.loglik.matrix.obs_count());
  } else {
    throw ValidationError("need --loglik, or --dataset together with "
                          "--draws, to obtain a log-likelihood matrix");
  }
  if (!exact_path.empty()) {
    require_file(exact_path, "exact");
    const io::ValueCsv exact = io::read_value_csv(exact_path);
    for (std::size_t i = 0; i < exact.values.size(); ++i) {
      if (!in.exact_by_id.emplace(exact.obs_ids[i], exact.values[i]).second)
        throw ValidationError(exact_path + ": duplicate observation id '" +
                              exact.obs_ids[i] + "'");
    }
  }
  return in;
}

SurrogateVector build_surrogate(const RunConfig& cfg, const ModelInputs& in) {
  const SurrogateMethod method = surrogate_method_from_name(cfg.surrogate);
  const LogLikMatrix& ll = in.loglik.matrix;
  const std::int64_t used =
      cfg.draws_used > 0 ? cfg.draws_used : ll.draw_count();

  switch (method) {
    case SurrogateMethod::waic_s:
      return waic_surrogate(ll, used, cfg.threads);
    case SurrogateMethod::tis_s:
      return tis_surrogate(ll, used, {}, cfg.threads);
    case SurrogateMethod::psis:
      return psis_surrogate(ll, {}, cfg.threads);
    case SurrogateMethod::plpd: {
      if (!in.dataset || !in.draws)
        throw ValidationError("surrogate 'plpd' needs --dataset and --draws "
                              "to evaluate the likelihood at a point");
      const Eigen::VectorXd theta = models::point_estimate_from_draws(*in.draws);
      return plpd_surrogate(models::loglik_row_at(*in.dataset, theta));
    }
    case SurrogateMethod::delta1_waic_m:
    case SurrogateMethod::delta1_waic:
    case SurrogateMethod::delta2_waic: {
      if (!in.dataset || !in.draws)
        throw ValidationError("delta surrogates need --dataset and --draws "
                              "for derivatives and the posterior summary");
      const GaussianPosteriorSummary summary =
          models::posterior_summary_from_draws(*in.draws);
      const DeltaOrder order =
          method == SurrogateMethod::delta1_waic_m ? DeltaOrder::first_marginal
          : method == SurrogateMethod::delta1_waic ? DeltaOrder::first
                                                   : DeltaOrder::second;
      const PerObsDerivatives derivs = models::per_obs_derivatives(
          *in.dataset, summary.mean, order == DeltaOrder::second);
      return delta_waic_surrogate(lpd(ll, cfg.threads), derivs, summary,
                                  order);
    }
    case SurrogateMethod::exact: {
      if (in.exact_by_id.empty())
        throw ValidationError("surrogate 'exact' needs --exact covering "
                              "every observation");
      std::vector<double> values;
      values.reserve(in.loglik.obs_ids.size());
      for (const std::string& id : in.loglik.obs_ids) {
        const auto it = in.exact_by_id.find(id);
        if (it == in.exact_by_id.end())
          throw ValidationError("surrogate 'exact': no exact value for "
                                "observation '" + id + "'");
        values.push_back(it->second);
      }
      return exact_surrogate(values);
    }
  }
  throw InternalError("build_surrogate: unhandled method");
}

std::vector<double> pps_probs_from_surrogate(const SurrogateVector& s) {
  std::vector<double> w(s.values.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::abs(s.values[i]);
    if (!(w[i] > 0.0))
      throw DegeneracyError("pps_wr: surrogate value is exactly 0 at "
                            "observation index " + std::to_string(i) +
                            "; cannot form draw probabilities");
  }
  const double total = sum(w);
  for (double& v : w) v /= total;
  // polish so the stored probabilities sum to 1 within 1e-12 even for huge n
  const double resid = sum(w);
  for (double& v : w) v /= resid;
  return w;
}

SubsamplePlan make_plan(const RunConfig& cfg, std::int64_t n,
                        const SurrogateVector& surrogate,
                        std::uint64_t plan_seed) {
  if (cfg.m < 1) throw ValidationError("--m must be >= 1");
  if (cfg.m > n)
    throw ValidationError("--m exceeds the number of observations n=" +
                          std::to_string(n));
  const Scheme scheme = scheme_from_name(cfg.scheme);
  switch (scheme) {
    case Scheme::srs_wor: return srs_wor(n, cfg.m, plan_seed);
    case Scheme::srs_wr: return srs_wr(n, cfg.m, plan_seed);
    case Scheme::pps_wr:
      return pps_wr(pps_probs_from_surrogate(surrogate), cfg.m, plan_seed);
  }
  throw InternalError("make_plan: unhandled scheme");
}

std::vector<double> exact_at_plan(const ModelInputs& in,
                                  const SubsamplePlan& plan,
                                  const char* which) {
  if (in.exact_by_id.empty())
    throw ValidationError(std::string("missing --") + which +
                          " with exact leave-one-out values for the "
                          "subsample");
  std::vector<double> out(plan.indices.size());
  for (std::size_t j = 0; j < plan.indices.size(); ++j) {
    const std::string& id =
        in.loglik.obs_ids[static_cast<std::size_t>(plan.indices[j])];
    const auto it = in.exact_by_id.find(id);
    if (it == in.exact_by_id.end())
      throw ValidationError("exact value missing for sampled observation '" +
                            id + "'");
    out[j] = it->second;
  }
  return out;
}

json pareto_summary_json(const SurrogateVector& s) {
  if (!s.pareto_k) return nullptr;
  double k_max = -std::numeric_limits<double>::infinity();
  std::int64_t above = 0;
  std::int64_t degenerate = 0;
  for (const double k : *s.pareto_k) {
    if (std::isinf(k) && k < 0) {
      ++degenerate;
      continue;
    }
    k_max = std::max(k_max, k);
    if (k > 0.7) ++above;
  }
  json j;
  j["max"] = std::isinf(k_max) ? json(nullptr) : json(k_max);
  j["n_above_0_7"] = above;
  j["n_degenerate"] = degenerate;
  return j;
}

json estimate_json(const ElpdEstimate& est) {
  json j;
  j["elpd_hat"] = est.elpd_hat;
  j["se_subsampling"] = est.se_subsampling;
  j["sigma_loo_hat"] =
      est.sigma_loo_hat ? json(*est.sigma_loo_hat) : json(nullptr);
  j["sigma_loo_degenerate"] = est.sigma_loo_degenerate;
  j["n"] = est.n;
  j["m"] = est.m;
  j["estimator"] = estimator_kind_name(est.estimator);
  j["surrogate"] = est.surrogate_method;
  return j;
}

}  // namespace

json cmd_estimate(const RunConfig& cfg) {
  const std::uint64_t seed = require_seed(cfg);
  const ModelInputs in =
      load_model(cfg.loglik, cfg.dataset, cfg.draws, cfg.exact);
  const SurrogateVector surrogate = build_surrogate(cfg, in);
  const std::int64_t n = in.loglik.matrix.obs_count();
  const SubsamplePlan plan =
      make_plan(cfg, n, surrogate, Rng::derive_seed(seed, 0, "plan"));
  const std::vector<double> exact_s = exact_at_plan(in, plan, "exact");
  const ElpdEstimate est = estimate_model(surrogate, exact_s, plan);

  json j;
  j["command"] = "estimate";
  j.update(estimate_json(est));
  j["scheme"] = cfg.scheme;
  j["seed"] = seed;
  j["pareto_k_summary"] = pareto_summary_json(surrogate);
  return j;
}

json cmd_compare(const RunConfig& cfg) {
  const std::uint64_t seed = require_seed(cfg);
  const ModelInputs in_a =
      load_model(cfg.loglik, cfg.dataset, cfg.draws, cfg.exact);
  const ModelInputs in_b =
      load_model(cfg.loglik_b, cfg.dataset_b, cfg.draws_b, cfg.exact_b);
  if (in_a.loglik.obs_ids != in_b.loglik.obs_ids)
    throw ValidationError("compare: the two models disagree on observation "
                          "identifiers or their order; one shared subsample "
                          "requires identical observations");

  const SurrogateVector surr_a = build_surrogate(cfg, in_a);
  const SurrogateVector surr_b = build_surrogate(cfg, in_b);

  const std::int64_t n = in_a.loglik.matrix.obs_count();
  const SubsamplePlan plan =
      make_plan(cfg, n, surr_a, Rng::derive_seed(seed, 0, "plan"));
  const std::vector<double> exact_a = exact_at_plan(in_a, plan, "exact");
  const std::vector<double> exact_b = exact_at_plan(in_b, plan, "exact-b");

  const ComparisonResult r =
      compare_models(surr_a, surr_b, exact_a, exact_b, plan);

  json j;
  j["command"] = "compare";
  j["elpd_d_hat"] = r.elpd_d_hat;
  j["se_d"] = r.se_d;
  j["sigma_d_hat"] = r.sigma_d_hat;
  j["sigma_d_degenerate"] = r.sigma_d_degenerate;
  j["naive_sigma_d"] = r.naive_sigma_d;
  json per_model = json::array();
  json a = estimate_json(r.model_a);
  a["model"] = "a";
  a["pareto_k_summary"] = pareto_summary_json(surr_a);
  json b = estimate_json(r.model_b);
  b["model"] = "b";
  b["pareto_k_summary"] = pareto_summary_json(surr_b);
  per_model.push_back(std::move(a));
  per_model.push_back(std::move(b));
  j["per_model"] = std::move(per_model);
  j["n"] = n;
  j["m"] = cfg.m;
  j["scheme"] = cfg.scheme;
  j["surrogate"] = cfg.surrogate;
  j["seed"] = seed;
  return j;
}

json cmd_surrogate(const RunConfig& cfg) {
  if (cfg.out.empty())
    throw ValidationError("surrogate: --out <csv path> is required");
  const ModelInputs in =
      load_model(cfg.loglik, cfg.dataset, cfg.draws, cfg.exact);
  const SurrogateVector s = build_surrogate(cfg, in);

  io::ValueCsv csv;
  csv.obs_ids = in.loglik.obs_ids;
  csv.values = s.values;
  csv.pareto_k = s.pareto_k;
  io::write_value_csv(cfg.out, csv);

  json j;
  j["command"] = "surrogate";
  j["surrogate"] = cfg.surrogate;
  j["n"] = s.size();
  j["draws_used"] = s.draws_used;
  j["out"] = cfg.out;
  j["pareto_k_summary"] = pareto_summary_json(s);
  return j;
}

json cmd_simulate(const RunConfig& cfg) {
  const std::uint64_t seed = require_seed(cfg);
  if (cfg.out.empty())
    throw ValidationError("simulate: --out <directory> is required");
  if (cfg.sim_n < 1 || cfg.sim_p < 1)
    throw ValidationError("simulate: --n and --p must be >= 1");
  if (cfg.sim_draws < 1)
    throw ValidationError("simulate: --draws must be >= 1");
  if (cfg.sim_nested_pair && cfg.sim_p < 2)
    throw ValidationError("simulate: --nested-pair needs p >= 2");

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out);
  const models::NigPrior prior;

  const auto emit_model = [&](const models::BlrDataset& data,
                              std::uint64_t model_seed,
                              const std::string& suffix, json& files) {
    const models::ConjugateBlrPosterior post =
        models::fit_conjugate_blr(data, prior);
    const Eigen::MatrixXd draws =
        models::draw_posterior(post, cfg.sim_draws, model_seed);
    const LogLikMatrix ll = models::loglik_matrix(data, draws);
    const std::vector<double> exact =
        models::exact_loo_blr(data, prior, cfg.threads);
    const auto ids = io::default_obs_ids(data.n());

    const std::string draws_path =
        (fs::path(cfg.out) / ("draws" + suffix + ".csv")).string();
    const std::string ll_path =
        (fs::path(cfg.out) / ("loglik" + suffix + ".csv")).string();
    const std::string exact_path =
        (fs::path(cfg.out) / ("exact_loo" + suffix + ".csv")).string();
    io::write_draws_csv(draws_path, draws);
    io::write_loglik_csv(ll_path, ll, ids);
    io::ValueCsv exact_csv;
    exact_csv.obs_ids = ids;
    exact_csv.values = exact;
    io::write_value_csv(exact_path, exact_csv);
    files["draws" + suffix] = draws_path;
    files["loglik" + suffix] = ll_path;
    files["exact_loo" + suffix] = exact_path;
  };

  const models::BlrDataset data = models::simulate_blr(
      cfg.sim_n, cfg.sim_p, cfg.sim_r2, cfg.sim_sparse, seed);
  json files;
  const std::string dataset_path =
      (fs::path(cfg.out) / "dataset.csv").string();
  io::write_dataset_csv(dataset_path, data);
  files["dataset"] = dataset_path;
  emit_model(data, Rng::derive_seed(seed, 0, "model-a"), "", files);

  if (cfg.sim_nested_pair) {
    // model B drops the last covariate; same observations, same responses
    models::BlrDataset reduced;
    reduced.design = data.design.leftCols(data.p() - 1);
    reduced.response = data.response;
    reduced.true_beta = data.true_beta.head(data.p() - 1);
    reduced.noise_sd = data.noise_sd;
    reduced.target_r2 = data.target_r2;
    const std::string dataset_b_path =
        (fs::path(cfg.out) / "dataset_b.csv").string();
    io::write_dataset_csv(dataset_b_path, reduced);
    files["dataset_b"] = dataset_b_path;
    emit_model(reduced, Rng::derive_seed(seed, 1, "model-b"), "_b", files);
  }

  json j;
  j["command"] = "simulate";
  j["n"] = cfg.sim_n;
  j["p"] = cfg.sim_p;
  j["r2"] = cfg.sim_r2;
  j["sparse"] = cfg.sim_sparse;
  j["draws"] = cfg.sim_draws;
  j["nested_pair"] = cfg.sim_nested_pair;
  j["seed"] = seed;
  j["files"] = std::move(files);
  return j;
}

json cmd_replicate(const RunConfig& cfg) {
  const std::uint64_t seed = require_seed(cfg);
  if (cfg.replicates < 2)
    throw ValidationError("replicate: --replicates must be >= 2 to report an "
                          "empirical SE");
  const auto t0 = std::chrono::steady_clock::now();

  const ModelInputs in =
      load_model(cfg.loglik, cfg.dataset, cfg.draws, cfg.exact);
  const SurrogateVector surrogate = build_surrogate(cfg, in);
  const std::int64_t n = in.loglik.matrix.obs_count();

  std::vector<ElpdEstimate> estimates(
      static_cast<std::size_t>(cfg.replicates));
  parallel_for(cfg.replicates, cfg.threads, [&](std::int64_t r) {
    const SubsamplePlan plan = make_plan(
        cfg, n, surrogate,
        Rng::derive_seed(seed, static_cast<std::uint64_t>(r), "replicate"));
    const std::vector<double> exact_s = exact_at_plan(in, plan, "exact");
    estimates[static_cast<std::size_t>(r)] =
        estimate_model(surrogate, exact_s, plan);
  });

  std::vector<double> elpds(estimates.size());
  std::vector<double> ses(estimates.size());
  for (std::size_t r = 0; r < estimates.size(); ++r) {
    elpds[r] = estimates[r].elpd_hat;
    ses[r] = estimates[r].se_subsampling;
  }
  const double empirical_se = std::sqrt(sample_variance(elpds));
  const double mean_reported_se = mean(ses);

  json per = json::array();
  for (std::size_t r = 0; r < estimates.size(); ++r) {
    json e;
    e["replicate"] = r;
    e["elpd_hat"] = estimates[r].elpd_hat;
    e["se_subsampling"] = estimates[r].se_subsampling;
    per.push_back(std::move(e));
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::cerr << "replicate: wall time " << wall << " s\n";

  json j;
  j["command"] = "replicate";
  j["replicates"] = cfg.replicates;
  j["surrogate"] = cfg.surrogate;
  j["scheme"] = cfg.scheme;
  j["n"] = n;
  j["m"] = cfg.m;
  j["seed"] = seed;
  j["elpd_hat_mean"] = mean(elpds);
  j["empirical_se"] = empirical_se;
  j["mean_reported_se"] = mean_reported_se;
  j["per_replicate"] = std::move(per);
  return j;
}

json cmd_verify(const RunConfig& cfg) {
  const std::uint64_t seed = require_seed(cfg);
  const std::vector<std::int64_t> kGridN = {6, 8, 10};
  const std::vector<std::int64_t> kGridM = {2, 3, 4};
  constexpr int kPairsPerCell = 5;
  constexpr double kTol = 1e-9;

  double dev_elpd = 0.0;
  double dev_sigma2 = 0.0;
  double dev_var = 0.0;

  std::uint64_t cell = 0;
  for (const std::int64_t n : kGridN) {
    for (const std::int64_t m : kGridM) {
      for (int pair = 0; pair < kPairsPerCell; ++pair, ++cell) {
        Rng rng = Rng::derive(seed, cell, "verify-pairs");
        SurrogateVector surr;
        surr.method = SurrogateMethod::exact;
        std::vector<double> pi(static_cast<std::size_t>(n));
        surr.values.resize(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) {
          pi[static_cast<std::size_t>(i)] = 2.0 * rng.next_normal();
          surr.values[static_cast<std::size_t>(i)] =
              pi[static_cast<std::size_t>(i)] + rng.next_normal();
        }
        const double total = sum(pi);
        const double pop_mean = total / static_cast<double>(n);
        double pop_var = 0.0;
        for (const double v : pi) pop_var += (v - pop_mean) * (v - pop_mean);
        pop_var /= static_cast<double>(n);

        double sum_est = 0.0, sum_sigma2 = 0.0, sum_var = 0.0;
        std::vector<double> ests;
        enumerate_subsamples_wor(n, m, [&](std::span<const std::int64_t> s) {
          SubsamplePlan plan;
          plan.indices.assign(s.begin(), s.end());
          plan.scheme = Scheme::srs_wor;
          plan.m = m;
          plan.n = n;
          std::vector<double> exact_s(s.size());
          for (std::size_t j = 0; j < s.size(); ++j)
            exact_s[j] = pi[static_cast<std::size_t>(s[j])];
          const double est = diff_elpd(surr, exact_s, plan);
          const double var = diff_variance(surr, exact_s, plan);
          const Sigma2Loo s2 =
              diff_sigma2_loo(surr, exact_s, plan, est, var);
          sum_est += est;
          sum_var += var;
          sum_sigma2 += s2.raw;
          ests.push_back(est);
        });
        const double count = static_cast<double>(ests.size());
        const double mean_est = sum_est / count;
        double enum_var = 0.0;
        for (const double e : ests) enum_var += (e - mean_est) * (e - mean_est);
        enum_var /= count;

        dev_elpd = std::max(dev_elpd, std::abs(mean_est - total));
        dev_sigma2 =
            std::max(dev_sigma2, std::abs(sum_sigma2 / count - pop_var));
        dev_var = std::max(dev_var, std::abs(sum_var / count - enum_var));
      }
    }
  }

  const auto check = [&](const char* name, double dev) {
    json c;
    c["name"] = name;
    c["max_abs_dev"] = dev;
    c["tolerance"] = kTol;
    c["pass"] = dev < kTol;
    return c;
  };

  json checks = json::array();
  checks.push_back(check("diff_elpd_unbiased", dev_elpd));
  checks.push_back(check("sigma2_loo_unbiased", dev_sigma2));
  checks.push_back(check("variance_formula", dev_var));
  const bool pass = dev_elpd < kTol && dev_sigma2 < kTol && dev_var < kTol;

  json j;
  j["command"] = "verify";
  json grid;
  grid["n"] = kGridN;
  grid["m"] = kGridM;
  grid["pairs_per_cell"] = kPairsPerCell;
  j["grid"] = std::move(grid);
  j["checks"] = std::move(checks);
  j["pass"] = pass;
  return j;
}

int run_command(const std::string& command, const RunConfig& cfg) {
  json out;
  bool json_to_out_path = false;
  if (command == "simulate") {
    out = cmd_simulate(cfg);
  } else if (command == "surrogate") {
    out = cmd_surrogate(cfg);
  } else if (command == "estimate") {
    out = cmd_estimate(cfg);
    json_to_out_path = true;
  } else if (command == "compare") {
    out = cmd_compare(cfg);
    json_to_out_path = true;
  } else if (command == "replicate") {
    out = cmd_replicate(cfg);
    json_to_out_path = true;
  } else if (command == "verify") {
    out = cmd_verify(cfg);
    json_to_out_path = true;
  } else {
    throw ValidationError("unknown command '" + command + "'");
  }

  const std::string text = out.dump(2) + "\n";
  if (json_to_out_path && !cfg.out.empty())
    io::write_file_atomic(cfg.out, text);
  else
    std::cout << text;

  if (command == "verify" && !out["pass"].get<bool>()) return 4;
  return 0;
}

}  // namespace subloo::cli
