#include "vloc/kalman.h"

#include <cmath>

#include <Eigen/Cholesky>

#include "vloc/error.h"

namespace vloc {
namespace {

using Obs = Eigen::Matrix<double, 2, 4>;

Obs ObservationMatrix() {
  Obs h = Obs::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  return h;
}

StateCovariance Symmetrized(const StateCovariance& p) {
  return 0.5 * (p + p.transpose());
}

}  // namespace

void FilterConfig::Validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
  }
  if (!(sigma_r > 0.0) || !std::isfinite(sigma_r)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma_r must be positive");
  }
  if (!(p0_scale > 0.0) || !std::isfinite(p0_scale)) {
    throw Error(ErrorCode::kInvalidArgument, "p0_scale must be positive");
  }
  if (!(q_scale >= 0.0) || !std::isfinite(q_scale)) {
    throw Error(ErrorCode::kInvalidArgument,
                "q_scale must be non-negative");
  }
}

StateCovariance TransitionMatrix(double dt) {
  StateCovariance f = StateCovariance::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

FilterState InitFilter(const GeoPoint& first_meas, const FilterConfig& cfg) {
  cfg.Validate();
  FilterState s;
  s.x << first_meas.lat(), first_meas.lon(), 0.0, 0.0;
  s.p = cfg.p0_scale * StateCovariance::Identity();
  return s;
}

FilterState Predict(const FilterState& s, const FilterConfig& cfg) {
  const StateCovariance f = TransitionMatrix(cfg.dt);
  FilterState out;
  out.x = f * s.x;
  out.p = Symmetrized(f * s.p * f.transpose() +
                      cfg.q_scale * StateCovariance::Identity());
  return out;
}

FilterState Update(const FilterState& s, const GeoPoint& meas,
                   const FilterConfig& cfg) {
  const Obs h = ObservationMatrix();
  const Eigen::Matrix2d r =
      cfg.sigma_r * cfg.sigma_r * Eigen::Matrix2d::Identity();
  const Eigen::Vector2d z(meas.lat(), meas.lon());

  const Eigen::Vector2d nu = z - h * s.x;
  const Eigen::Matrix2d innovation_cov = h * s.p * h.transpose() + r;
  Eigen::LLT<Eigen::Matrix2d> llt(innovation_cov);
  if (llt.info() != Eigen::Success || !innovation_cov.allFinite()) {
    throw Error(ErrorCode::kSingularInnovation,
                "innovation covariance is not positive definite");
  }
  // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
  const Eigen::Matrix<double, 4, 2> k =
      llt.solve(h * s.p).transpose();

  const StateCovariance i_kh = StateCovariance::Identity() - k * h;
  FilterState out;
  out.x = s.x + k * nu;
  out.p = Symmetrized(i_kh * s.p * i_kh.transpose() +
                      k * r * k.transpose());
  return out;
}

FilterState Step(const FilterState& s, const GeoPoint& meas,
                 const FilterConfig& cfg) {
  return Update(Predict(s, cfg), meas, cfg);
}

GeoPoint PredictedPosition(const FilterState& s, const FilterConfig& cfg) {
  return GeoPoint(s.x(0) + cfg.dt * s.x(2), s.x(1) + cfg.dt * s.x(3));
}

}  // namespace vloc
