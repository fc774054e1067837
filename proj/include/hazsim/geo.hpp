#pragma once

#include <cmath>

namespace hazsim {

struct LatLon {
  double lat = 0.0;  // degrees north
  double lon = 0.0;  // degrees east
};

inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * (kPi / 180.0); }
inline double rad2deg(double r) { return r * (180.0 / kPi); }

inline double haversine_km(LatLon a, LatLon b) {
  const double phi1 = deg2rad(a.lat);
  const double phi2 = deg2rad(b.lat);
  const double dphi = deg2rad(b.lat - a.lat);
  const double dlam = deg2rad(b.lon - a.lon);
  const double s = std::sin(dphi / 2), t = std::sin(dlam / 2);
  const double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

// Initial bearing from -> to, compass convention (0 = north, 90 = east).
inline double initial_bearing_deg(LatLon from, LatLon to) {
  const double phi1 = deg2rad(from.lat);
  const double phi2 = deg2rad(to.lat);
  const double dlam = deg2rad(to.lon - from.lon);
  const double y = std::sin(dlam) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) -
                   std::sin(phi1) * std::cos(phi2) * std::cos(dlam);
  return rad2deg(std::atan2(y, x));
}

// Point at (east_km, north_km) from an origin; adequate for the small study
// areas handled here (error < 0.3% below 500 km).
inline LatLon offset_km(LatLon origin, double east_km, double north_km) {
  const double km_per_deg = kEarthRadiusKm * kPi / 180.0;
  LatLon p;
  p.lat = origin.lat + north_km / km_per_deg;
  p.lon = origin.lon + east_km / (km_per_deg * std::cos(deg2rad(origin.lat)));
  return p;
}

}  // namespace hazsim
