#include "subloo/models.hpp"

#include <cmath>
#include <numbers>

#include "subloo/errors.hpp"
#include "subloo/numerics.hpp"
#include "subloo/parallel.hpp"
#include "subloo/rng.hpp"

namespace subloo::models {
namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

Eigen::MatrixXd standard_normal_matrix(std::int64_t rows, std::int64_t cols,
                                       Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.next_normal();
  return m;
}

double student_t_logpdf(double y, double dof, double location, double scale2,
                        double lgamma_half_nu_plus, double lgamma_half_nu) {
  const double z2 = (y - location) * (y - location) / (dof * scale2);
  return lgamma_half_nu_plus - lgamma_half_nu -
         0.5 * std::log(dof * std::numbers::pi * scale2) -
         0.5 * (dof + 1.0) * std::log1p(z2);
}

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_rank(const Eigen::MatrixXd& design) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols())
    throw DegeneracyError("design matrix is rank deficient");
}

}  // namespace

BlrDataset simulate_blr(std::int64_t n, std::int64_t p, double target_r2,
                        bool sparse, std::uint64_t seed) {
  if (!(target_r2 > 0.0 && target_r2 < 1.0))
    throw ValidationError("simulate_blr: target R^2 must lie in (0, 1)");
  if (n < p + 2)
    throw ValidationError("simulate_blr: need n >= p + 2 for the conjugate "
                          "fit");

  BlrDataset data;
  data.target_r2 = target_r2;
  data.true_beta = Eigen::VectorXd::Ones(p);
  if (sparse && p > 1)
    data.true_beta.tail(p - 1).setZero();

  // Standard-normal covariates make the population signal variance equal
  // to |beta|^2, so the noise sd solving R^2 is available in closed form.
  const double signal_sd = data.true_beta.norm();
  data.noise_sd = signal_sd * std::sqrt((1.0 - target_r2) / target_r2);

  Rng design_rng = Rng::derive(seed, 0, "blr-design");
  data.design = standard_normal_matrix(n, p, design_rng);
  Rng noise_rng = Rng::derive(seed, 0, "blr-noise");
  data.response = data.design * data.true_beta;
  for (Eigen::Index i = 0; i < data.response.size(); ++i)
    data.response(i) += data.noise_sd * noise_rng.next_normal();
  return data;
}

Eigen::MatrixXd ConjugateBlrPosterior::coef_marginal_cov() const {
  if (!(ig_shape > 1.0))
    throw DegeneracyError("coef_marginal_cov: needs inverse-gamma shape > 1");
  return (ig_scale / (ig_shape - 1.0)) * coef_scale;
}

ConjugateBlrPosterior fit_conjugate_blr(const BlrDataset& data,
                                        const NigPrior& prior) {
  if (!(prior.coef_scale2 > 0.0) || !(prior.shape > 0.0) ||
      !(prior.scale > 0.0))
    throw ValidationError("fit_conjugate_blr: prior hyperparameters must be "
                          "positive");
  check_rank(data.design);

  const Eigen::Index p = data.design.cols();
  const double n = static_cast<double>(data.design.rows());
  const Eigen::MatrixXd precision =
      Eigen::MatrixXd::Identity(p, p) / prior.coef_scale2 +
      data.design.transpose() * data.design;
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw DegeneracyError("fit_conjugate_blr: posterior precision is not "
                          "positive definite");

  const Eigen::VectorXd xty = data.design.transpose() * data.response;
  ConjugateBlrPosterior post;
  post.coef_mean = llt.solve(xty);
  post.coef_scale = llt.solve(Eigen::MatrixXd::Identity(p, p));
  post.ig_shape = prior.shape + 0.5 * n;
  post.ig_scale = prior.scale + 0.5 * (data.response.squaredNorm() -
                                       xty.dot(post.coef_mean));
  if (!(post.ig_scale > 0.0))
    throw DegeneracyError("fit_conjugate_blr: nonpositive posterior scale");
  return post;
}

Eigen::MatrixXd draw_posterior(const ConjugateBlrPosterior& posterior,
                               std::int64_t draws, std::uint64_t seed) {
  if (draws < 1) throw ValidationError("draw_posterior: need draws >= 1");
  const Eigen::Index p = posterior.coef_mean.size();
  const Eigen::LLT<Eigen::MatrixXd> llt(posterior.coef_scale);
  if (llt.info() != Eigen::Success)
    throw DegeneracyError("draw_posterior: coefficient scale matrix is not "
                          "positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();

  Rng rng = Rng::derive(seed, 0, "blr-post-draws");
  Eigen::MatrixXd out(draws, p + 1);
  Eigen::VectorXd z(p);
  for (std::int64_t s = 0; s < draws; ++s) {
    const double sigma2 = posterior.ig_scale / rng.next_gamma(posterior.ig_shape);
    for (Eigen::Index j = 0; j < p; ++j) z(j) = rng.next_normal();
    out.row(s).head(p) =
        (posterior.coef_mean + std::sqrt(sigma2) * (chol * z)).transpose();
    out(s, p) = sigma2;
  }
  return out;
}

LogLikMatrix loglik_matrix(const BlrDataset& data,
                           const Eigen::MatrixXd& draws) {
  const Eigen::Index p = data.design.cols();
  if (draws.cols() != p + 1)
    throw ValidationError("loglik_matrix: draw matrix must have p + 1 "
                          "columns (coefficients then sigma^2)");
  Eigen::MatrixXd ll = draws.leftCols(p) * data.design.transpose();  // S x n
  for (Eigen::Index s = 0; s < ll.rows(); ++s) {
    const double sigma2 = draws(s, p);
    if (!(sigma2 > 0.0))
      throw ValidationError("loglik_matrix: draws carry a nonpositive "
                            "sigma^2");
    const double c = -0.5 * (kLogTwoPi + std::log(sigma2));
    const double inv2s2 = 0.5 / sigma2;
    for (Eigen::Index i = 0; i < ll.cols(); ++i) {
      const double r = data.response(i) - ll(s, i);
      ll(s, i) = c - r * r * inv2s2;
    }
  }
  return LogLikMatrix::from_matrix(std::move(ll));
}

std::vector<double> exact_loo_blr(const BlrDataset& data,
                                  const NigPrior& prior, int threads) {
  const ConjugateBlrPosterior post = fit_conjugate_blr(data, prior);
  const std::int64_t n = data.n();
  const double yty = data.response.squaredNorm();
  const Eigen::VectorXd xty = data.design.transpose() * data.response;

  const double a_loo = prior.shape + 0.5 * static_cast<double>(n - 1);
  const double dof = 2.0 * a_loo;
  const double lg_plus = std::lgamma(0.5 * (dof + 1.0));
  const double lg = std::lgamma(0.5 * dof);

  std::vector<double> loo(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](std::int64_t i) {
    const Eigen::VectorXd x = data.design.row(i).transpose();
    const double yi = data.response(i);
    const Eigen::VectorXd u = post.coef_scale * x;  // A^{-1} x_i
    const double h = x.dot(u);
    if (!(1.0 - h > 1e-12))
      throw DegeneracyError("exact_loo_blr: deleting observation " +
                            std::to_string(i) + " loses rank");
    // Sherman-Morrison downdate of the posterior mean and scale
    const Eigen::VectorXd v_c = post.coef_mean - u * yi;  // V (xty - x yi)
    const Eigen::VectorXd mean_loo = v_c + u * (x.dot(v_c) / (1.0 - h));
    const double cross = xty.dot(mean_loo) - yi * x.dot(mean_loo);
    const double b_loo =
        prior.scale + 0.5 * ((yty - yi * yi) - cross);
    if (!(b_loo > 0.0))
      throw DegeneracyError("exact_loo_blr: nonpositive held-out posterior "
                            "scale");
    const double scale2 = (b_loo / a_loo) * (1.0 + h / (1.0 - h));
    loo[static_cast<std::size_t>(i)] = student_t_logpdf(
        yi, dof, x.dot(mean_loo), scale2, lg_plus, lg);
  });
  return loo;
}

std::vector<double> exact_loo_blr_refit(const BlrDataset& data,
                                        const NigPrior& prior) {
  const std::int64_t n = data.n();
  const Eigen::Index p = data.design.cols();
  std::vector<double> loo(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    BlrDataset held;
    held.design.resize(n - 1, p);
    held.response.resize(n - 1);
    Eigen::Index r = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      if (j == i) continue;
      held.design.row(r) = data.design.row(j);
      held.response(r) = data.response(j);
      ++r;
    }
    const ConjugateBlrPosterior post = fit_conjugate_blr(held, prior);
    const Eigen::VectorXd x = data.design.row(i).transpose();
    const double dof = 2.0 * post.ig_shape;
    const double scale2 = (post.ig_scale / post.ig_shape) *
                          (1.0 + x.dot(post.coef_scale * x));
    loo[static_cast<std::size_t>(i)] = student_t_logpdf(
        data.response(i), dof, x.dot(post.coef_mean), scale2,
        std::lgamma(0.5 * (dof + 1.0)), std::lgamma(0.5 * dof));
  }
  return loo;
}

Eigen::VectorXd point_estimate_from_draws(const Eigen::MatrixXd& draws) {
  if (draws.rows() < 1 || draws.cols() < 2)
    throw ValidationError("point_estimate_from_draws: malformed draw matrix");
  const Eigen::Index p = draws.cols() - 1;
  Eigen::VectorXd theta(p + 1);
  theta.head(p) = draws.leftCols(p).colwise().mean();
  theta(p) = 0.5 * draws.col(p).array().log().mean();
  return theta;
}

GaussianPosteriorSummary posterior_summary_from_draws(
    const Eigen::MatrixXd& draws) {
  if (draws.rows() < 2)
    throw ValidationError("posterior_summary_from_draws: need at least 2 "
                          "draws");
  const Eigen::Index p = draws.cols() - 1;
  Eigen::MatrixXd t(draws.rows(), p + 1);
  t.leftCols(p) = draws.leftCols(p);
  t.col(p) = 0.5 * draws.col(p).array().log();

  GaussianPosteriorSummary summary;
  summary.mean = t.colwise().mean();
  const Eigen::MatrixXd centered = t.rowwise() - summary.mean.transpose();
  summary.covariance = centered.transpose() * centered /
                       static_cast<double>(draws.rows() - 1);
  summary.validate();
  return summary;
}

std::vector<double> loglik_row_at(const BlrDataset& data,
                                  const Eigen::VectorXd& theta) {
  const Eigen::Index p = data.design.cols();
  if (theta.size() != p + 1)
    throw ValidationError("loglik_row_at: theta must be (beta, log sigma)");
  const double log_sigma = theta(p);
  const double sigma2 = std::exp(2.0 * log_sigma);
  const double c = -0.5 * kLogTwoPi - log_sigma;
  const Eigen::VectorXd fitted = data.design * theta.head(p);
  std::vector<double> out(static_cast<std::size_t>(data.n()));
  for (std::int64_t i = 0; i < data.n(); ++i) {
    const double r = data.response(i) - fitted(i);
    out[static_cast<std::size_t>(i)] = c - 0.5 * r * r / sigma2;
  }
  return out;
}

PerObsDerivatives per_obs_derivatives(const BlrDataset& data,
                                      const Eigen::VectorXd& theta,
                                      bool with_hessians) {
  const Eigen::Index p = data.design.cols();
  if (theta.size() != p + 1)
    throw ValidationError("per_obs_derivatives: theta must be "
                          "(beta, log sigma)");
  const double sigma2 = std::exp(2.0 * theta(p));
  const Eigen::VectorXd fitted = data.design * theta.head(p);

  PerObsDerivatives d;
  d.gradients.resize(data.n(), p + 1);
  if (with_hessians) d.hessians.reserve(static_cast<std::size_t>(data.n()));
  for (std::int64_t i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd x = data.design.row(i).transpose();
    const double r = data.response(i) - fitted(i);
    d.gradients.row(i).head(p) = (r / sigma2) * x.transpose();
    d.gradients(i, p) = -1.0 + r * r / sigma2;
    if (with_hessians) {
      Eigen::MatrixXd h(p + 1, p + 1);
      h.topLeftCorner(p, p) = -(x * x.transpose()) / sigma2;
      h.topRightCorner(p, 1) = (-2.0 * r / sigma2) * x;
      h.bottomLeftCorner(1, p) = h.topRightCorner(p, 1).transpose();
      h(p, p) = -2.0 * r * r / sigma2;
      d.hessians.push_back(std::move(h));
    }
  }
  return d;
}

FixedNoiseBlrPosterior fit_fixed_noise_blr(const BlrDataset& data,
                                           double prior_var, double noise_sd) {
  if (!(prior_var > 0.0) || !(noise_sd > 0.0))
    throw ValidationError("fit_fixed_noise_blr: prior variance and noise sd "
                          "must be positive");
  check_rank(data.design);
  const Eigen::Index p = data.design.cols();
  const double s2 = noise_sd * noise_sd;
  const Eigen::MatrixXd precision =
      Eigen::MatrixXd::Identity(p, p) / prior_var +
      data.design.transpose() * data.design / s2;
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  FixedNoiseBlrPosterior post;
  post.covariance = llt.solve(Eigen::MatrixXd::Identity(p, p));
  post.mean = llt.solve(data.design.transpose() * data.response / s2);
  post.noise_sd = noise_sd;
  return post;
}

Eigen::MatrixXd draw_fixed_noise(const FixedNoiseBlrPosterior& posterior,
                                 std::int64_t draws, std::uint64_t seed) {
  GaussianPosteriorSummary g{posterior.mean, posterior.covariance};
  return draw_gaussian(g, draws, seed);
}

LogLikMatrix loglik_matrix_fixed_noise(const BlrDataset& data,
                                       const Eigen::MatrixXd& beta_draws,
                                       double noise_sd) {
  if (beta_draws.cols() != data.design.cols())
    throw ValidationError("loglik_matrix_fixed_noise: draw width must match "
                          "the design");
  const double s2 = noise_sd * noise_sd;
  const double c = -0.5 * (kLogTwoPi + std::log(s2));
  Eigen::MatrixXd ll = beta_draws * data.design.transpose();
  for (Eigen::Index s = 0; s < ll.rows(); ++s)
    for (Eigen::Index i = 0; i < ll.cols(); ++i) {
      const double r = data.response(i) - ll(s, i);
      ll(s, i) = c - 0.5 * r * r / s2;
    }
  return LogLikMatrix::from_matrix(std::move(ll));
}

PerObsDerivatives per_obs_derivatives_fixed_noise(const BlrDataset& data,
                                                  const Eigen::VectorXd& beta,
                                                  double noise_sd,
                                                  bool with_hessians) {
  const Eigen::Index p = data.design.cols();
  if (beta.size() != p)
    throw ValidationError("per_obs_derivatives_fixed_noise: beta dimension "
                          "mismatch");
  const double s2 = noise_sd * noise_sd;
  const Eigen::VectorXd fitted = data.design * beta;

  PerObsDerivatives d;
  d.gradients.resize(data.n(), p);
  if (with_hessians) d.hessians.reserve(static_cast<std::size_t>(data.n()));
  for (std::int64_t i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd x = data.design.row(i).transpose();
    const double r = data.response(i) - fitted(i);
    d.gradients.row(i) = (r / s2) * x.transpose();
    if (with_hessians) d.hessians.push_back(-(x * x.transpose()) / s2);
  }
  return d;
}

LogisticDataset simulate_logistic(std::int64_t n, std::int64_t p,
                                  std::uint64_t seed) {
  if (n < p + 2)
    throw ValidationError("simulate_logistic: need n >= p + 2");
  LogisticDataset data;
  data.true_beta.resize(p);
  for (Eigen::Index j = 0; j < p; ++j)
    data.true_beta(j) = (j % 2 == 0 ? 1.0 : -1.0) * 1.2 /
                        std::sqrt(static_cast<double>(p));
  Rng design_rng = Rng::derive(seed, 0, "logit-design");
  data.design = standard_normal_matrix(n, p, design_rng);
  Rng label_rng = Rng::derive(seed, 0, "logit-labels");
  data.response.resize(n);
  const Eigen::VectorXd z = data.design * data.true_beta;
  for (std::int64_t i = 0; i < n; ++i)
    data.response(i) = label_rng.next_double() < sigmoid(z(i)) ? 1.0 : 0.0;
  return data;
}

namespace {

double logistic_log_posterior(const LogisticDataset& data, double prior_sd,
                              const Eigen::VectorXd& beta) {
  const Eigen::VectorXd z = data.design * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    ll += data.response(i) * z(i) - softplus(z(i));
  return ll - beta.squaredNorm() / (2.0 * prior_sd * prior_sd);
}

}  // namespace

LaplaceFit logistic_laplace(const LogisticDataset& data, double prior_sd,
                            int max_iter, double tol) {
  if (!(prior_sd > 0.0))
    throw ValidationError("logistic_laplace: prior sd must be positive");
  for (Eigen::Index i = 0; i < data.response.size(); ++i)
    if (data.response(i) != 0.0 && data.response(i) != 1.0)
      throw ValidationError("logistic_laplace: responses must be 0 or 1");

  const Eigen::Index p = data.design.cols();
  const double prior_prec = 1.0 / (prior_sd * prior_sd);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double objective = logistic_log_posterior(data, prior_sd, beta);

  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd z = data.design * beta;
    Eigen::VectorXd prob(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) prob(i) = sigmoid(z(i));
    const Eigen::VectorXd grad =
        data.design.transpose() * (data.response - prob) - prior_prec * beta;
    const double grad_norm = grad.cwiseAbs().maxCoeff();

    const Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
    const Eigen::MatrixXd neg_hessian =
        data.design.transpose() * w.asDiagonal() * data.design +
        prior_prec * Eigen::MatrixXd::Identity(p, p);
    const Eigen::LLT<Eigen::MatrixXd> llt(neg_hessian);

    if (grad_norm < tol) {
      // saturated likelihood at the mode: every observation classified with
      // probability numerically 0 or 1, so the curvature is prior-only and
      // the data are (quasi-)separable under this prior
      if (w.maxCoeff() < 1e-10)
        throw DegeneracyError("logistic_laplace: all fitted probabilities "
                              "are numerically 0 or 1; the data appear "
                              "separable");
      LaplaceFit fit;
      fit.posterior.mean = beta;
      fit.posterior.covariance = llt.solve(Eigen::MatrixXd::Identity(p, p));
      fit.iterations = it - 1;
      fit.grad_norm = grad_norm;
      return fit;
    }

    const Eigen::VectorXd step = llt.solve(grad);
    // Inside the quadratic-convergence zone the objective moves by less
    // than FP resolution, so take the full Newton step without asking the
    // line search to certify an improvement it cannot see.
    const double decrement = grad.dot(step);
    if (decrement < 1e-8 * (1.0 + std::abs(objective))) {
      beta += step;
      objective = logistic_log_posterior(data, prior_sd, beta);
    } else {
      double alpha = 1.0;
      bool moved = false;
      while (alpha >= 1.0 / 1024.0) {
        const Eigen::VectorXd candidate = beta + alpha * step;
        const double cand_obj =
            logistic_log_posterior(data, prior_sd, candidate);
        if (cand_obj > objective) {
          beta = candidate;
          objective = cand_obj;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved)
        throw DegeneracyError(
            "logistic_laplace: line search stalled at iteration " +
            std::to_string(it) + " with |grad|=" + std::to_string(grad_norm));
    }
    if (beta.cwiseAbs().maxCoeff() > 250.0)
      throw DegeneracyError("logistic_laplace: mode diverging; the data may "
                            "be separable");
  }

  const Eigen::VectorXd z = data.design * beta;
  Eigen::VectorXd prob(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) prob(i) = sigmoid(z(i));
  const double grad_norm =
      (data.design.transpose() * (data.response - prob) - prior_prec * beta)
          .cwiseAbs()
          .maxCoeff();
  throw DegeneracyError("logistic_laplace: no convergence in " +
                        std::to_string(max_iter) +
                        " iterations; |grad|=" + std::to_string(grad_norm));
}

LogLikMatrix logistic_loglik_matrix(const LogisticDataset& data,
                                    const Eigen::MatrixXd& beta_draws) {
  if (beta_draws.cols() != data.design.cols())
    throw ValidationError("logistic_loglik_matrix: draw width must match the "
                          "design");
  Eigen::MatrixXd ll = beta_draws * data.design.transpose();
  for (Eigen::Index s = 0; s < ll.rows(); ++s)
    for (Eigen::Index i = 0; i < ll.cols(); ++i) {
      const double z = ll(s, i);
      ll(s, i) = data.response(i) * z - softplus(z);
    }
  return LogLikMatrix::from_matrix(std::move(ll));
}

Eigen::MatrixXd draw_gaussian(const GaussianPosteriorSummary& posterior,
                              std::int64_t draws, std::uint64_t seed) {
  posterior.validate();
  if (draws < 1) throw ValidationError("draw_gaussian: need draws >= 1");
  const Eigen::Index p = posterior.mean.size();
  const Eigen::LLT<Eigen::MatrixXd> llt(posterior.covariance);
  if (llt.info() != Eigen::Success)
    throw DegeneracyError("draw_gaussian: covariance is not positive "
                          "definite");
  const Eigen::MatrixXd chol = llt.matrixL();

  Rng rng = Rng::derive(seed, 0, "gaussian-draws");
  Eigen::MatrixXd out(draws, p);
  Eigen::VectorXd z(p);
  for (std::int64_t s = 0; s < draws; ++s) {
    for (Eigen::Index j = 0; j < p; ++j) z(j) = rng.next_normal();
    out.row(s) = (posterior.mean + chol * z).transpose();
  }
  return out;
}

std::vector<double> logistic_draw_log_weight_offsets(
    const LogisticDataset& data, double prior_sd,
    const GaussianPosteriorSummary& proposal,
    const Eigen::MatrixXd& beta_draws) {
  proposal.validate();
  const Eigen::Index p = data.design.cols();
  if (beta_draws.cols() != p)
    throw ValidationError("logistic_draw_log_weight_offsets: draw width "
                          "mismatch");
  const Eigen::LLT<Eigen::MatrixXd> llt(proposal.covariance);
  if (llt.info() != Eigen::Success)
    throw DegeneracyError("logistic_draw_log_weight_offsets: proposal "
                          "covariance is not positive definite");
  double log_det = 0.0;
  const Eigen::MatrixXd chol = llt.matrixL();
  for (Eigen::Index j = 0; j < p; ++j) log_det += 2.0 * std::log(chol(j, j));

  const double prior_prec = 1.0 / (prior_sd * prior_sd);
  const double log_prior_const =
      -0.5 * static_cast<double>(p) *
      (kLogTwoPi + 2.0 * std::log(prior_sd));
  const double log_q_const =
      -0.5 * static_cast<double>(p) * kLogTwoPi - 0.5 * log_det;

  std::vector<double> offsets(static_cast<std::size_t>(beta_draws.rows()));
  for (Eigen::Index s = 0; s < beta_draws.rows(); ++s) {
    const Eigen::VectorXd beta = beta_draws.row(s).transpose();
    const Eigen::VectorXd z = data.design * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
      ll += data.response(i) * z(i) - softplus(z(i));
    const double log_prior =
        log_prior_const - 0.5 * prior_prec * beta.squaredNorm();
    const Eigen::VectorXd centered = beta - proposal.mean;
    const double log_q =
        log_q_const - 0.5 * centered.dot(llt.solve(centered));
    offsets[static_cast<std::size_t>(s)] = ll + log_prior - log_q;
  }
  return offsets;
}

std::vector<double> logistic_loo_refit_oracle(const LogisticDataset& data,
                                              double prior_sd, int max_iter,
                                              double tol,
                                              std::int64_t oracle_draws,
                                              std::uint64_t seed,
                                              int threads) {
  const std::int64_t n = data.n();
  if (n > 500)
    throw ValidationError("logistic_loo_refit_oracle: refit oracle is capped "
                          "at n <= 500");
  const Eigen::Index p = data.design.cols();

  std::vector<double> loo(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](std::int64_t i) {
    LogisticDataset held;
    held.design.resize(n - 1, p);
    held.response.resize(n - 1);
    Eigen::Index r = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      if (j == i) continue;
      held.design.row(r) = data.design.row(j);
      held.response(r) = data.response(j);
      ++r;
    }
    const LaplaceFit fit = logistic_laplace(held, prior_sd, max_iter, tol);
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(i), "loo-refit");
    const Eigen::LLT<Eigen::MatrixXd> llt(fit.posterior.covariance);
    const Eigen::MatrixXd chol = llt.matrixL();
    const Eigen::VectorXd x = data.design.row(i).transpose();
    const double yi = data.response(i);

    std::vector<double> ll(static_cast<std::size_t>(oracle_draws));
    Eigen::VectorXd z(p);
    for (std::int64_t s = 0; s < oracle_draws; ++s) {
      for (Eigen::Index j = 0; j < p; ++j) z(j) = rng.next_normal();
      const double eta = x.dot(fit.posterior.mean + chol * z);
      ll[static_cast<std::size_t>(s)] = yi * eta - softplus(eta);
    }
    loo[static_cast<std::size_t>(i)] = log_mean_exp(ll);
  });
  return loo;
}

}  // namespace subloo::models
