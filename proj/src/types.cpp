#include "subloo/types.hpp"

#include "subloo/errors.hpp"

namespace subloo {

LogLikMatrix LogLikMatrix::from_matrix(Eigen::MatrixXd m) {
  if (m.rows() < 1 || m.cols() < 1)
    throw ValidationError("LogLikMatrix: need at least one draw and one "
                          "observation");
  if (!m.allFinite())
    throw ValidationError("LogLikMatrix: entries must be finite");
  return LogLikMatrix{std::move(m)};
}

std::string surrogate_method_name(SurrogateMethod m) {
  switch (m) {
    case SurrogateMethod::plpd: return "plpd";
    case SurrogateMethod::waic_s: return "waic_s";
    case SurrogateMethod::tis_s: return "tis_s";
    case SurrogateMethod::psis: return "psis";
    case SurrogateMethod::delta1_waic_m: return "delta1_waic_m";
    case SurrogateMethod::delta1_waic: return "delta1_waic";
    case SurrogateMethod::delta2_waic: return "delta2_waic";
    case SurrogateMethod::exact: return "exact";
  }
  throw InternalError("surrogate_method_name: unknown method");
}

SurrogateMethod surrogate_method_from_name(const std::string& name) {
  if (name == "plpd") return SurrogateMethod::plpd;
  if (name == "waic_s") return SurrogateMethod::waic_s;
  if (name == "tis_s") return SurrogateMethod::tis_s;
  if (name == "psis") return SurrogateMethod::psis;
  if (name == "delta1_waic_m") return SurrogateMethod::delta1_waic_m;
  if (name == "delta1_waic") return SurrogateMethod::delta1_waic;
  if (name == "delta2_waic") return SurrogateMethod::delta2_waic;
  if (name == "exact") return SurrogateMethod::exact;
  throw ValidationError("unknown surrogate method '" + name + "'");
}

void GaussianPosteriorSummary::validate() const {
  if (covariance.rows() != covariance.cols())
    throw ValidationError("posterior covariance must be square");
  if (covariance.rows() != mean.size())
    throw ValidationError("posterior mean/covariance dimension mismatch");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale)
    throw ValidationError("posterior covariance is not symmetric within 1e-8");
}

std::string estimator_kind_name(EstimatorKind k) {
  return k == EstimatorKind::diff ? "diff" : "hh";
}

}  // namespace subloo
