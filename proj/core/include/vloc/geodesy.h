#pragma once

namespace vloc {

// Mean Earth radius used for every metric distance in the library.
inline constexpr double kEarthRadiusM = 6371000.0;

// WGS-84 latitude/longitude in decimal degrees. Construction validates the
// ranges; a default-constructed point is (0, 0).
class GeoPoint {
 public:
  constexpr GeoPoint() = default;
  GeoPoint(double lat_deg, double lon_deg);

  double lat() const noexcept { return lat_; }
  double lon() const noexcept { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

bool IsValidLatLon(double lat_deg, double lon_deg) noexcept;

// Great-circle distance on a sphere of radius kEarthRadiusM.
double HaversineM(const GeoPoint& a, const GeoPoint& b) noexcept;

// Planar small-area approximation, evaluated at the mean latitude. Only
// meaningful for points a few kilometres apart.
double EquirectM(const GeoPoint& a, const GeoPoint& b) noexcept;

// Moves `origin` by the given north/east offsets using a local flat-earth
// step (111 320 m per degree of latitude, scaled by cos(lat) for longitude).
GeoPoint OffsetFlat(const GeoPoint& origin, double north_m, double east_m);

}  // namespace vloc
