#include "apfmpc/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace apfmpc {

void PotentialConfig::validate() const {
  if (a_nr < 0.0 || a_tr < 0.0 || a_v < 0.0 || a_tl1 < 0.0 || a_tl2 < 0.0) {
    throw std::invalid_argument("PotentialConfig: intensities must be >= 0");
  }
  if (!(b_nr > 0.0)) throw std::invalid_argument("PotentialConfig: b_nr must be > 0");
  if (!(b_tr > 0.0)) throw std::invalid_argument("PotentialConfig: b_tr must be > 0");
  if (!(r_v > 0.0)) throw std::invalid_argument("PotentialConfig: r_v must be > 0");
  if (!(nr_inner > 0.0) || !(nr_outer > nr_inner)) {
    throw std::invalid_argument("PotentialConfig: need outer cutoff > inner cutoff > 0");
  }
}

EnvironmentSnapshot EnvironmentSnapshot::from_query(const EnvironmentQuery& query,
                                                    std::vector<SurroundingVehicle> vehicles) {
  EnvironmentSnapshot snap;
  snap.markings = query.markings;
  snap.lights = query.lights;
  snap.vehicles = std::move(vehicles);
  snap.lane_width = query.lane_width;
  return snap;
}

double pf_non_traversable(double s_r, const PotentialConfig& cfg) {
  const double e_s = cfg.a_nr / std::pow(cfg.nr_outer, cfg.b_nr);
  if (s_r >= cfg.nr_outer) return 0.0;
  if (s_r <= cfg.nr_inner) return cfg.a_nr / std::pow(cfg.nr_inner, cfg.b_nr) - e_s;
  return cfg.a_nr / std::pow(s_r, cfg.b_nr) - e_s;
}

double pf_traversable(double s_r, const PotentialConfig& cfg) {
  if (s_r >= cfg.b_tr) return 0.0;
  const double d = s_r - cfg.b_tr;
  return cfg.a_tr * d * d;
}

std::pair<Vector2d, Vector2d> circle_centers(const Vector2d& position, double heading,
                                             double r_v) {
  const Vector2d axis{std::cos(heading), std::sin(heading)};
  return {position + r_v * axis, position - r_v * axis};
}

double pf_vehicle(const std::pair<Vector2d, Vector2d>& ev_circles,
                  const SurroundingVehicle& sv, const PotentialConfig& cfg) {
  const auto sv_circles = circle_centers({sv.p_x, sv.p_y}, sv.heading, cfg.r_v);
  double acc = 0.0;
  for (const Vector2d& c : {ev_circles.first, ev_circles.second}) {
    for (const Vector2d& o : {sv_circles.first, sv_circles.second}) {
      const double d2 = std::max((c - o).squaredNorm(), cfg.v_dist2_floor);
      acc += cfg.a_v / std::pow(d2, cfg.b_v);
    }
  }
  return acc;
}

double pf_traffic_light(double d_x, double d_yl, double d_yr, double c_tl,
                        const PotentialConfig& cfg) {
  return c_tl * (cfg.a_tl1 / d_x + cfg.a_tl2 / d_yl + cfg.a_tl2 / d_yr);
}

namespace {

// Lateral position of the marking line in the HAP frame of its reference
// centerline point.
double marking_lateral(const MarkingObservation& m, double lane_width) {
  const double center = hap_lateral(m.ref.pos(), m.ref);
  return m.side == Side::Left ? center + 0.5 * lane_width : center - 0.5 * lane_width;
}

struct TlDistances {
  bool active = false;
  double d_x = 0.0, d_yl = 0.0, d_yr = 0.0;
  bool dx_clamped = false, dyl_clamped = false, dyr_clamped = false;
  Vector2d front{0.0, 0.0};
};

TlDistances tl_distances(const LightObservation& light, const VehicleState& ev,
                         const PotentialConfig& cfg, double lane_width) {
  TlDistances out;
  if (light.c_tl == 0.0) return out;
  const Vector2d dir{std::cos(light.tangent), std::sin(light.tangent)};
  out.front = Vector2d{ev.p_x, ev.p_y} +
              2.0 * cfg.r_v * Vector2d{std::cos(ev.phi), std::sin(ev.phi)};
  const double raw_dx = (light.stop_point - out.front).dot(dir);
  if (raw_dx <= 0.0 || raw_dx > cfg.tl_activation) return out;

  out.active = true;
  out.dx_clamped = raw_dx < cfg.tl_dx_min;
  out.d_x = std::max(raw_dx, cfg.tl_dx_min);

  const double p_y_ev = hap_lateral(light.lane_ref.pos(), light.lane_ref);
  const double y_ev = hap_lateral({ev.p_x, ev.p_y}, light.lane_ref);
  const double raw_l = (p_y_ev + 0.5 * lane_width) - y_ev;
  const double raw_r = y_ev - (p_y_ev - 0.5 * lane_width);
  out.dyl_clamped = raw_l < cfg.tl_lat_min;
  out.dyr_clamped = raw_r < cfg.tl_lat_min;
  out.d_yl = std::max(raw_l, cfg.tl_lat_min);
  out.d_yr = std::max(raw_r, cfg.tl_lat_min);
  return out;
}

}  // namespace

FieldBreakdown evaluate_field(const EnvironmentSnapshot& env, const VehicleState& ev_state,
                              const PotentialConfig& cfg) {
  FieldBreakdown out;
  const Vector2d p{ev_state.p_x, ev_state.p_y};

  for (const auto& m : env.markings) {
    const double m_y = marking_lateral(m, env.lane_width);
    const double y_ev = hap_lateral(p, m.ref);
    const double s_r = std::abs(m_y - y_ev);
    if (m.kind == MarkingKind::NonTraversable) {
      out.nr += pf_non_traversable(s_r, cfg);
    } else {
      out.tr += pf_traversable(s_r, cfg);
    }
  }

  const auto ev_circles = circle_centers(p, ev_state.phi, cfg.r_v);
  for (const auto& sv : env.vehicles) {
    out.vehicles += pf_vehicle(ev_circles, sv, cfg);
  }

  for (const auto& light : env.lights) {
    const TlDistances d = tl_distances(light, ev_state, cfg, env.lane_width);
    if (d.active) {
      out.tl += pf_traffic_light(d.d_x, d.d_yl, d.d_yr, light.c_tl, cfg);
    }
  }
  return out;
}

double total_field(const EnvironmentSnapshot& env, const VehicleState& ev_state,
                   const PotentialConfig& cfg) {
  return evaluate_field(env, ev_state, cfg).total();
}

Vector6d field_gradient(const EnvironmentSnapshot& env, const VehicleState& ev_state,
                        const PotentialConfig& cfg) {
  Vector6d grad = Vector6d::Zero();
  const Vector2d p{ev_state.p_x, ev_state.p_y};

  for (const auto& m : env.markings) {
    const double m_y = marking_lateral(m, env.lane_width);
    const double y_ev = hap_lateral(p, m.ref);
    const double diff = m_y - y_ev;
    const double s_r = std::abs(diff);

    double df_ds = 0.0;
    if (m.kind == MarkingKind::NonTraversable) {
      if (s_r > cfg.nr_inner && s_r < cfg.nr_outer) {
        df_ds = -cfg.b_nr * cfg.a_nr / std::pow(s_r, cfg.b_nr + 1.0);
      }
    } else {
      if (s_r < cfg.b_tr) df_ds = 2.0 * cfg.a_tr * (s_r - cfg.b_tr);
    }
    if (df_ds != 0.0) {
      // ds/dp = -sign(diff) * d(y_ev)/dp
      const double sign = diff >= 0.0 ? 1.0 : -1.0;
      grad[0] += df_ds * (-sign) * std::sin(m.ref.beta);
      grad[1] += df_ds * (-sign) * std::cos(m.ref.beta);
    }
  }

  const double c_phi = std::cos(ev_state.phi);
  const double s_phi = std::sin(ev_state.phi);
  const auto ev_circles = circle_centers(p, ev_state.phi, cfg.r_v);
  for (const auto& sv : env.vehicles) {
    const auto sv_circles = circle_centers({sv.p_x, sv.p_y}, sv.heading, cfg.r_v);
    for (int q = 0; q < 2; ++q) {
      const Vector2d c = q == 0 ? ev_circles.first : ev_circles.second;
      const double axis_sign = q == 0 ? 1.0 : -1.0;
      const Vector2d dc_dphi = axis_sign * cfg.r_v * Vector2d{-s_phi, c_phi};
      for (const Vector2d& o : {sv_circles.first, sv_circles.second}) {
        const double d2 = (c - o).squaredNorm();
        if (d2 <= cfg.v_dist2_floor) continue;  // saturated: flat
        const double df_dd2 = -cfg.a_v * cfg.b_v / std::pow(d2, cfg.b_v + 1.0);
        const Vector2d dd2_dp = 2.0 * (c - o);
        grad[0] += df_dd2 * dd2_dp.x();
        grad[1] += df_dd2 * dd2_dp.y();
        grad[2] += df_dd2 * dd2_dp.dot(dc_dphi);
      }
    }
  }

  for (const auto& light : env.lights) {
    const TlDistances d = tl_distances(light, ev_state, cfg, env.lane_width);
    if (!d.active) continue;
    const Vector2d dir{std::cos(light.tangent), std::sin(light.tangent)};
    if (!d.dx_clamped) {
      // d_x = (stop - front) . dir, front = p + 2 r_v (cos phi, sin phi)
      const double df_ddx = -light.c_tl * cfg.a_tl1 / (d.d_x * d.d_x);
      grad[0] += df_ddx * -dir.x();
      grad[1] += df_ddx * -dir.y();
      grad[2] += df_ddx * -(2.0 * cfg.r_v * (dir.x() * -s_phi + dir.y() * c_phi));
    }
    const double sin_b = std::sin(light.lane_ref.beta);
    const double cos_b = std::cos(light.lane_ref.beta);
    if (!d.dyl_clamped) {
      const double df_dl = -light.c_tl * cfg.a_tl2 / (d.d_yl * d.d_yl);
      grad[0] += df_dl * -sin_b;
      grad[1] += df_dl * -cos_b;
    }
    if (!d.dyr_clamped) {
      const double df_dr = -light.c_tl * cfg.a_tl2 / (d.d_yr * d.d_yr);
      grad[0] += df_dr * sin_b;
      grad[1] += df_dr * cos_b;
    }
  }

  return grad;
}

}  // namespace apfmpc
