#pragma once

#include <Eigen/Core>

#include "vloc/geodesy.h"

namespace vloc {

// Constant-velocity model in decimal degrees.
struct FilterConfig {
  double dt = 1.0;          // seconds between measurements
  double sigma_r = 1e-4;    // measurement noise std-dev, degrees
  double p0_scale = 1000.0; // initial covariance = p0_scale * I
  double q_scale = 1e-10;   // per-step process noise = q_scale * I, degrees^2

  void Validate() const;
};

using StateVector = Eigen::Matrix<double, 4, 1>;
using StateCovariance = Eigen::Matrix<double, 4, 4>;

// X = [lat, lon, vlat, vlon] (degrees, degrees/second) and its covariance.
struct FilterState {
  StateVector x = StateVector::Zero();
  StateCovariance p = StateCovariance::Zero();

  GeoPoint Position() const { return GeoPoint(x(0), x(1)); }
};

// Transition matrix: positions advance by velocity * dt.
StateCovariance TransitionMatrix(double dt);

FilterState InitFilter(const GeoPoint& first_meas, const FilterConfig& cfg);

FilterState Predict(const FilterState& s, const FilterConfig& cfg);

// Joseph-form update. Throws kSingularInnovation if the innovation
// covariance cannot be inverted.
FilterState Update(const FilterState& s, const GeoPoint& meas,
                   const FilterConfig& cfg);

// Update(Predict(s)).
FilterState Step(const FilterState& s, const GeoPoint& meas,
                 const FilterConfig& cfg);

// Position the model expects one interval after `s`, i.e. the position part
// of Predict(s).
GeoPoint PredictedPosition(const FilterState& s, const FilterConfig& cfg);

}  // namespace vloc
