#include "vloc/geodesy.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vloc/error.h"

namespace vloc {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMetersPerDegree = 111320.0;

double Square(double x) { return x * x; }

}  // namespace

bool IsValidLatLon(double lat_deg, double lon_deg) noexcept {
  return std::isfinite(lat_deg) && std::isfinite(lon_deg) &&
         lat_deg >= -90.0 && lat_deg <= 90.0 && lon_deg >= -180.0 &&
         lon_deg <= 180.0;
}

GeoPoint::GeoPoint(double lat_deg, double lon_deg)
    : lat_(lat_deg), lon_(lon_deg) {
  if (!IsValidLatLon(lat_deg, lon_deg)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "coordinate out of range: lat=" << lat_deg << " lon=" << lon_deg;
    throw Error(ErrorCode::kOutOfRange, msg.str());
  }
}

double HaversineM(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double lat1 = a.lat() * kDegToRad;
  const double lat2 = b.lat() * kDegToRad;
  const double d_lat = lat2 - lat1;
  const double d_lon = (b.lon() - a.lon()) * kDegToRad;
  const double h = Square(std::sin(d_lat / 2.0)) +
                   std::cos(lat1) * std::cos(lat2) *
                       Square(std::sin(d_lon / 2.0));
  // Rounding can push h a hair above 1 for antipodal points.
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(std::min(h, 1.0)));
}

double EquirectM(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double mean_lat = 0.5 * (a.lat() + b.lat()) * kDegToRad;
  const double dy = (b.lat() - a.lat()) * kDegToRad;
  const double dx = (b.lon() - a.lon()) * kDegToRad * std::cos(mean_lat);
  return kEarthRadiusM * std::hypot(dx, dy);
}

GeoPoint OffsetFlat(const GeoPoint& origin, double north_m, double east_m) {
  const double lat = origin.lat() + north_m / kMetersPerDegree;
  const double lon =
      origin.lon() +
      east_m / (kMetersPerDegree * std::cos(origin.lat() * kDegToRad));
  return GeoPoint(lat, lon);
}

}  // namespace vloc
