#pragma once

#include <vector>

#include <Eigen/Core>

#include "hazsim/catalog.hpp"
#include "hazsim/geo.hpp"

namespace hazsim {

struct WindParams {
  double holland_b = 1.3;
  double background_fraction = 0.55;     // share of translation added as background flow
  double background_rotation_deg = 20.0; // counterclockwise
  double swrf = 0.85;                    // surface wind reduction factor
  double gust_factor = 1.3;

  void validate() const;
};

struct WindFieldMap {
  std::vector<LatLon> locations;
  Eigen::VectorXd max_sustained_ms;  // event maximum per location
  Eigen::VectorXd max_gust_ms;
  double time_step_h = 1.0;
};

// Axisymmetric gradient wind; peaks at v_max for r = r_max and vanishes at
// the center and at infinity.
double holland_profile(double r_km, double v_max_ms, double r_max_km, double b);

// Sweep the storm along its (linearly interpolated) track and keep the
// per-location maximum of |swrf * azimuthal wind + background translation|.
WindFieldMap event_wind_map(const SyntheticStorm& storm,
                            const std::vector<LatLon>& locations,
                            const WindParams& params, double time_step_h);

}  // namespace hazsim
