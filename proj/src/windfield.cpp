#include "hazsim/windfield.hpp"

#include <cmath>

#include "hazsim/errors.hpp"

namespace hazsim {

void WindParams::validate() const {
  if (holland_b < 0.8 || holland_b > 2.5)
    throw ValidationError("wind params: holland_b outside [0.8, 2.5]");
  if (background_fraction < 0 || background_fraction > 1)
    throw ValidationError("wind params: background_fraction outside [0, 1]");
  if (swrf <= 0 || swrf > 1)
    throw ValidationError("wind params: swrf outside (0, 1]");
  if (gust_factor < 1)
    throw ValidationError("wind params: gust_factor below 1");
}

double holland_profile(double r_km, double v_max_ms, double r_max_km, double b) {
  if (r_km < 0 || v_max_ms <= 0 || r_max_km <= 0)
    throw HazError("holland_profile: bad arguments");
  if (r_km == 0) return 0.0;
  const double x = std::pow(r_max_km / r_km, b);
  if (x > 700.0) return 0.0;  // x e^{1-x} underflows anyway
  return v_max_ms * std::sqrt(x * std::exp(1.0 - x));
}

namespace {

struct CenterState {
  LatLon pos;
  double v_max, r_max;
  double trans_e, trans_n;  // m/s
};

CenterState interpolate(const SyntheticStorm& s, double t) {
  const auto& tr = s.track;
  std::size_t hi = 1;
  while (hi + 1 < tr.size() && tr[hi].time_offset_h < t) ++hi;
  if (tr.size() == 1) hi = 0;
  const std::size_t lo = hi > 0 ? hi - 1 : 0;
  double f = 0.0;
  if (hi != lo && tr[hi].time_offset_h > tr[lo].time_offset_h)
    f = (t - tr[lo].time_offset_h) / (tr[hi].time_offset_h - tr[lo].time_offset_h);
  f = std::clamp(f, 0.0, 1.0);

  auto trans_en = [](const TrackPoint& p) {
    const double b = deg2rad(p.trans_bearing_deg);
    return std::pair{p.trans_speed_ms * std::sin(b), p.trans_speed_ms * std::cos(b)};
  };
  const auto [e0, n0] = trans_en(tr[lo]);
  const auto [e1, n1] = trans_en(tr[hi]);

  CenterState c;
  c.pos.lat = tr[lo].lat + f * (tr[hi].lat - tr[lo].lat);
  c.pos.lon = tr[lo].lon + f * (tr[hi].lon - tr[lo].lon);
  c.v_max = tr[lo].v_max_ms + f * (tr[hi].v_max_ms - tr[lo].v_max_ms);
  c.r_max = tr[lo].r_max_km + f * (tr[hi].r_max_km - tr[lo].r_max_km);
  c.trans_e = e0 + f * (e1 - e0);
  c.trans_n = n0 + f * (n1 - n0);
  return c;
}

}  // namespace

WindFieldMap event_wind_map(const SyntheticStorm& storm,
                            const std::vector<LatLon>& locations,
                            const WindParams& params, double time_step_h) {
  params.validate();
  if (time_step_h <= 0 || time_step_h > 6)
    throw HazError("event_wind_map: time_step_h outside (0, 6]");
  if (storm.track.empty()) throw HazError("event_wind_map: empty track");
  if (locations.empty()) throw HazError("event_wind_map: no locations");

  WindFieldMap out;
  out.locations = locations;
  out.time_step_h = time_step_h;
  out.max_sustained_ms = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(locations.size()));

  // local equirectangular frame anchored at the location centroid; distance
  // error stays below 0.3% for the < 500 km ranges that matter here
  LatLon ref{0, 0};
  for (const auto& p : locations) {
    ref.lat += p.lat;
    ref.lon += p.lon;
  }
  ref.lat /= static_cast<double>(locations.size());
  ref.lon /= static_cast<double>(locations.size());
  const double km_per_deg = kEarthRadiusKm * kPi / 180.0;
  const double coslat = std::cos(deg2rad(ref.lat));
  auto to_km = [&](LatLon p) {
    return std::pair{(p.lon - ref.lon) * km_per_deg * coslat,
                     (p.lat - ref.lat) * km_per_deg};
  };
  std::vector<double> loc_x(locations.size()), loc_y(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const auto [x, y] = to_km(locations[i]);
    loc_x[i] = x;
    loc_y[i] = y;
  }

  const double t0 = storm.track.front().time_offset_h;
  const double t1 = storm.track.back().time_offset_h;
  const double rot = deg2rad(params.background_rotation_deg);
  const double cr = std::cos(rot), sr = std::sin(rot);

  double t = t0;
  bool last = false;
  while (!last) {
    if (t >= t1) {
      t = t1;
      last = true;
    }
    const CenterState c = interpolate(storm, t);
    const auto [cx, cy] = to_km(c.pos);
    // background flow: translation rotated counterclockwise, scaled
    const double bg_e = params.background_fraction * (c.trans_e * cr - c.trans_n * sr);
    const double bg_n = params.background_fraction * (c.trans_e * sr + c.trans_n * cr);

    for (std::size_t i = 0; i < locations.size(); ++i) {
      const double dx = loc_x[i] - cx;
      const double dy = loc_y[i] - cy;
      const double r = std::hypot(dx, dy);
      double we = bg_e, wn = bg_n;
      if (r > 1e-9) {
        const double v =
            params.swrf * holland_profile(r, c.v_max, c.r_max, params.holland_b) / r;
        // cyclonic (counterclockwise) flow: tangent perpendicular to the radial
        we += v * -dy;
        wn += v * dx;
      }
      const double speed = std::hypot(we, wn);
      if (speed > out.max_sustained_ms[static_cast<Eigen::Index>(i)])
        out.max_sustained_ms[static_cast<Eigen::Index>(i)] = speed;
    }
    t += time_step_h;
  }

  out.max_gust_ms = params.gust_factor * out.max_sustained_ms;
  return out;
}

}  // namespace hazsim
