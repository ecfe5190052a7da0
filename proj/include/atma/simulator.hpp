// Time-stepping kinematic oracle. Replays leader-follower trajectory
// translations and runs emergency-stop, lane-change, and
// intersection-crossing scenes so the closed-form thresholds can be
// checked against an independent integration of the same kinematics.
//
// All motion here is piecewise linear in time, so event times detected
// while stepping are refined by linear interpolation inside the bracketing
// step, which is exact for these dynamics. simulate_emergency_stop is the
// deliberate exception: it reports the raw first-order Euler result so the
// dt-convergence behavior stays observable.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "atma/guidance.hpp"
#include "atma/units.hpp"

namespace atma {

struct TrajectorySample {
    double t_s = 0.0;
    double position_ft = 0.0;  // signed path coordinate
    double speed_fps = 0.0;
    int lane = 1;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;

    void validate() const {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (samples[i].speed_fps < 0.0) {
                throw std::invalid_argument("Trajectory: negative speed at sample " +
                                            std::to_string(i));
            }
            if (i > 0 && samples[i].t_s <= samples[i - 1].t_s) {
                throw std::invalid_argument("Trajectory: time not strictly increasing at sample " +
                                            std::to_string(i));
            }
        }
    }

    bool empty() const { return samples.empty(); }
    double start_time() const { return samples.front().t_s; }
    double end_time() const { return samples.back().t_s; }

    /// Linear interpolation between samples; t must lie within the span.
    double position_at(double t) const {
        if (empty()) throw std::domain_error("Trajectory: empty");
        if (t < start_time() - 1e-12 || t > end_time() + 1e-12) {
            throw std::domain_error("Trajectory: time " + std::to_string(t) + " outside span");
        }
        t = std::clamp(t, start_time(), end_time());
        auto it = std::lower_bound(samples.begin(), samples.end(), t,
                                   [](const TrajectorySample& s, double tt) { return s.t_s < tt; });
        if (it == samples.begin()) return it->position_ft;
        if (it == samples.end()) return samples.back().position_ft;
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (t - lo.t_s) / (hi.t_s - lo.t_s);
        return lo.position_ft + w * (hi.position_ft - lo.position_ft);
    }
};

/// The follower's path is the leader's, shifted later by tau and back by
/// d. Sample times and speeds carry over unchanged.
inline Trajectory simulate_newell_follower(const Trajectory& leader, Duration tau, Distance d) {
    leader.validate();
    Trajectory follower;
    follower.samples.reserve(leader.samples.size());
    for (const auto& s : leader.samples) {
        follower.samples.push_back({s.t_s + tau.s(), s.position_ft - d.ft(), s.speed_fps, s.lane});
    }
    return follower;
}

struct SimConfig {
    double dt_s = 0.1;
    double horizon_s = 0.0;       // 0 = derive from the scene
    double gv_length_ft = 15.0;   // general-vehicle box, margins only
    double time_epsilon_s = 1e-9; // tie-breaking slop on pass/fail comparisons
    double bisection_tol_s = 1e-4;

    void validate() const {
        if (dt_s <= 0.0) throw std::invalid_argument("SimConfig: dt must be > 0");
        if (horizon_s != 0.0 && horizon_s < dt_s) {
            throw std::invalid_argument("SimConfig: horizon must be >= dt");
        }
    }
};

struct EmergencyStopResult {
    double stop_time_s = 0.0;
    double stop_distance_ft = 0.0;
    Trajectory trajectory;
};

/// Explicit first-order Euler braking from v0 to rest. The result carries
/// the integration's dt-bounded error by design: |x - v0^2/(2a)| <= dt*v0.
inline EmergencyStopResult simulate_emergency_stop(Speed v0, Deceleration alpha,
                                                   const SimConfig& cfg) {
    cfg.validate();
    EmergencyStopResult r;
    double t = 0.0;
    double x = 0.0;
    double v = v0.fps();
    r.trajectory.samples.push_back({t, x, v, 1});
    while (v > 0.0) {
        x += v * cfg.dt_s;
        v = std::max(0.0, v - alpha.fps2() * cfg.dt_s);
        t += cfg.dt_s;
        r.trajectory.samples.push_back({t, x, v, 1});
    }
    r.stop_time_s = t;
    r.stop_distance_ft = x;
    return r;
}

namespace detail {

/// Stop budget measured by integration: hold v0 for the reaction time,
/// then brake at alpha; the rest instant is interpolated inside the
/// bracketing step (exact for linear velocity decay).
inline double measure_stop_budget_s(double v0_fps, double alpha_fps2, double reaction_s,
                                    double dt_s) {
    if (v0_fps <= 0.0) return reaction_s;
    double t = reaction_s;  // nothing to integrate while speed is held
    double v = v0_fps;
    while (true) {
        const double v_next = v - alpha_fps2 * dt_s;
        if (v_next <= 0.0) {
            return t + v / alpha_fps2;
        }
        v = v_next;
        t += dt_s;
    }
}

/// First time >= 0 at which a point moving as pos0 + v*t reaches target;
/// 0 if already past, +inf if unreachable.
inline double crossing_time(double pos0, double v, double target) {
    if (pos0 >= target) return 0.0;
    if (v <= 0.0) return std::numeric_limits<double>::infinity();
    return (target - pos0) / v;
}

}  // namespace detail

struct SimEvent {
    double t_s = 0.0;
    std::string actor;
    std::string what;

    std::string to_string() const {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "t=%.6f %s: ", t_s, actor.c_str());
        return buf + what;
    }
};

struct SafetyOutcome {
    bool collision = false;
    double min_headway_s = 0.0;   // tightest instantaneous time headway seen
    double min_spacing_ft = 0.0;  // tightest clear spacing seen
    bool lead_gap_ok = false;     // (a) LT stop budget fits behind the lead
    bool change_window_ok = false;  // (b) lag stays out of the gap interval until the FT is in
    bool lag_gap_ok = false;      // (c) lag stop budget fits behind the FT
    double lead_gap_slack_s = 0.0;
    double change_window_slack_s = 0.0;
    double lag_gap_slack_s = 0.0;
    std::vector<SimEvent> events;

    bool safe() const { return lead_gap_ok && change_window_ok && lag_gap_ok && !collision; }
};

struct LaneChangeRun {
    SafetyOutcome outcome;
    Trajectory lead, lt, ft, lag;
};

/// Lane-change scene. The target lane carries a lead and a lag general
/// vehicle at free-flow speed separated by headway_gap * FFS of spacing.
/// The LT changes at t=0 with its rear at the reference point; its
/// insertion takes exactly its measured stop budget of stream time behind
/// the lead. The FT changes after covering the command gap; the lag
/// vehicle reacts to it and brakes. Gap budgets are all measured as time
/// gaps at the reference point, which is what the critical-gap sum is
/// made of.
inline LaneChangeRun simulate_lane_change_detailed(Duration headway_gap, Speed v_lt,
                                                   const ModelParams& p, const SimConfig& cfg) {
    cfg.validate();
    if (v_lt.fps() <= 0.0) {
        throw std::domain_error("simulate_lane_change: requires v_lt > 0");
    }
    const double dt = cfg.dt_s;
    const double v_truck = v_lt.fps();
    const double v_gv = p.ffs.fps();
    const double H = headway_gap.s();
    const double L_truck = p.truck.length.ft();
    const double L_gv = cfg.gv_length_ft;
    const double L_gap = p.gap_command.ft();

    LaneChangeRun run;
    auto& out = run.outcome;

    // Measured budgets (integration, not the closed form).
    const double lt_budget =
        detail::measure_stop_budget_s(v_truck, p.alpha_lt.fps2(), p.reaction_time.s(), dt);
    const double lag_budget =
        detail::measure_stop_budget_s(v_gv, p.alpha_gv_emergency.fps2(), p.reaction_time.s(), dt);

    // Scene at t=0, positions of front bumpers; reference point 0 is the
    // LT rear at the change instant, where the FT front will enter.
    const double lt_front0 = L_truck;
    const double ft_front0 = -L_gap;                     // clear gap behind the LT rear
    const double lead_rear0 = lt_budget * v_gv;          // insertion policy: budget exactly spent
    const double lead_front0 = lead_rear0 + L_gv;
    const double lag_front0 = lead_rear0 - H * v_gv;

    out.events.push_back({0.0, "lt", "changes into target lane"});

    // FT completes its change after covering the command gap.
    const double t_ft_change = L_gap / v_truck;

    // Unimpeded lag-front arrival at the reference point: the stream time
    // the gap actually offers behind the LT's insertion.
    const double t_lag_arrival = detail::crossing_time(lag_front0, v_gv, 0.0);

    out.lead_gap_slack_s = 0.0;  // exact by insertion policy
    out.lead_gap_ok = true;
    out.change_window_slack_s = t_lag_arrival - t_ft_change;
    out.change_window_ok = out.change_window_slack_s >= -cfg.time_epsilon_s;
    out.lag_gap_slack_s = t_lag_arrival - t_ft_change - lag_budget;
    out.lag_gap_ok = out.lag_gap_slack_s >= -cfg.time_epsilon_s;

    // Step the scene for the margin fields and the event log. The real lag
    // vehicle reacts to the FT entering its lane and brakes.
    const double t_brake = t_ft_change + p.reaction_time.s();
    const double t_lag_stop = t_brake + v_gv / p.alpha_gv_emergency.fps2();
    double horizon = cfg.horizon_s > 0.0
                         ? cfg.horizon_s
                         : std::max({t_ft_change, t_lag_stop, t_lag_arrival}) + 5.0;
    if (!std::isfinite(horizon)) horizon = t_lag_stop + 5.0;

    out.min_spacing_ft = std::numeric_limits<double>::infinity();
    out.min_headway_s = std::numeric_limits<double>::infinity();

    bool ft_changed = false;
    bool lag_braking = false;
    bool lag_stopped = false;
    double lag_front = lag_front0;
    double lag_v = v_gv;

    const auto n_steps = static_cast<std::size_t>(std::ceil(horizon / dt));
    for (std::size_t k = 0; k <= n_steps; ++k) {
        const double t = k * dt;
        const double lt_front = lt_front0 + v_truck * t;
        const double ft_front = ft_front0 + v_truck * t;
        const double lead_rear = lead_rear0 + v_gv * t;

        if (!ft_changed && ft_front >= 0.0 - 1e-12) {
            ft_changed = true;
            out.events.push_back({t_ft_change, "ft", "changes into target lane"});
        }
        if (!lag_braking && t >= t_brake - 1e-12 && ft_changed) {
            lag_braking = true;
            out.events.push_back({t_brake, "lag", "begins emergency braking"});
        }

        auto consider_pair = [&](double spacing, double follower_speed) {
            out.min_spacing_ft = std::min(out.min_spacing_ft, spacing);
            if (follower_speed > 0.0) {
                out.min_headway_s = std::min(out.min_headway_s, spacing / follower_speed);
            }
            if (spacing <= 0.0) out.collision = true;
        };

        consider_pair(lead_rear - lt_front, v_truck);
        if (ft_changed) {
            consider_pair((ft_front - L_truck) - lag_front, lag_v);
        } else {
            consider_pair((lt_front - L_truck) - lag_front, lag_v);
        }

        // advance the lag vehicle
        if (lag_braking && !lag_stopped) {
            const double a = p.alpha_gv_emergency.fps2();
            const double v_next = lag_v - a * dt;
            if (v_next <= 0.0) {
                lag_front += 0.5 * lag_v * lag_v / a;  // final partial step to rest
                out.events.push_back({t + lag_v / a, "lag", "stopped"});
                lag_v = 0.0;
                lag_stopped = true;
            } else {
                lag_front += lag_v * dt - 0.5 * a * dt * dt;
                lag_v = v_next;
            }
        } else if (!lag_stopped) {
            lag_front += lag_v * dt;
        }

        run.lead.samples.push_back({t, lead_front0 + v_gv * t, v_gv, 1});
        run.lt.samples.push_back({t, lt_front, v_truck, 1});
        run.ft.samples.push_back({t, ft_front, v_truck, ft_changed ? 1 : 2});
        run.lag.samples.push_back({t, lag_front, lag_v, 1});
    }

    if (!out.change_window_ok) {
        out.events.push_back({t_lag_arrival, "lag", "enters the inter-truck gap interval"});
    }
    if (out.collision) {
        out.min_spacing_ft = std::min(out.min_spacing_ft, 0.0);
        out.events.push_back({0.0, "scene", "contact detected during the run"});
    }
    return run;
}

inline SafetyOutcome simulate_lane_change(Duration headway_gap, Speed v_lt, const ModelParams& p,
                                          const SimConfig& cfg) {
    return simulate_lane_change_detailed(headway_gap, v_lt, p, cfg).outcome;
}

enum class Movement { Straight, LeftTurn };

struct IntersectionResult {
    bool pass = false;
    double required_s = 0.0;  // time until the FT rear clears the far side
    double margin_s = 0.0;    // available - required
    std::vector<SimEvent> events;
    Trajectory system;  // LT front position
};

/// Advances the system from the stop bar at constant speed and measures
/// when the FT rear clears the far side of the movement.
inline IntersectionResult simulate_intersection(Duration available_time, Movement movement,
                                                Speed v_lt, const ModelParams& p,
                                                const SimConfig& cfg) {
    cfg.validate();
    if (v_lt.fps() <= 0.0) {
        throw std::domain_error("simulate_intersection: requires v_lt > 0");
    }
    const double movement_ft = movement == Movement::Straight
                                   ? intersection_length(p.geometry).ft()
                                   : left_turn_path_length(p.geometry).ft();
    IntersectionResult r;
    const double v = v_lt.fps();
    const double dt = cfg.dt_s;
    // LT front starts at the stop bar (0); the FT rear trails the whole
    // system extent behind it.
    const double system_extent = p.gap_command.ft() + 2.0 * p.truck.length.ft();
    double ft_rear = -system_extent;
    double t = 0.0;
    r.system.samples.push_back({t, 0.0, v, 1});
    r.events.push_back({0.0, "lt", "front crosses the stop bar"});
    while (ft_rear < movement_ft) {
        const double ft_rear_next = ft_rear + v * dt;
        if (ft_rear_next >= movement_ft) {
            t += (movement_ft - ft_rear) / v;  // interpolate the clearing instant
            ft_rear = movement_ft;
        } else {
            t += dt;
            ft_rear = ft_rear_next;
        }
        r.system.samples.push_back({t, ft_rear + system_extent, v, 1});
    }
    r.required_s = t;
    r.events.push_back({t, "ft", "rear clears the far side"});
    r.margin_s = available_time.s() - r.required_s;
    r.pass = r.margin_s >= -cfg.time_epsilon_s;
    return r;
}

/// Smallest stream headway the lane-change scene accepts, by bisection on
/// the pass/fail outcome only.
inline Duration find_min_safe_headway(Speed v_lt, const ModelParams& p, const SimConfig& cfg) {
    double lo = 0.0;  // unsafe: the lag starts at the lead's rear
    double hi = 1.0;
    int guard = 0;
    while (!simulate_lane_change(Duration::seconds(hi), v_lt, p, cfg).safe()) {
        hi *= 2.0;
        if (++guard > 16) {
            throw std::runtime_error("find_min_safe_headway: no safe headway below 65536 s");
        }
    }
    while (hi - lo > cfg.bisection_tol_s) {
        const double mid = 0.5 * (lo + hi);
        if (simulate_lane_change(Duration::seconds(mid), v_lt, p, cfg).safe()) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return Duration::seconds(hi);
}

/// Smallest available time the intersection scene passes with, by
/// bisection on the pass/fail outcome only.
inline Duration find_min_clearance_time(Movement movement, Speed v_lt, const ModelParams& p,
                                        const SimConfig& cfg) {
    double lo = 0.0;
    double hi = 1.0;
    int guard = 0;
    while (!simulate_intersection(Duration::seconds(hi), movement, v_lt, p, cfg).pass) {
        hi *= 2.0;
        if (++guard > 16) {
            throw std::runtime_error("find_min_clearance_time: no passing time below 65536 s");
        }
    }
    while (hi - lo > cfg.bisection_tol_s) {
        const double mid = 0.5 * (lo + hi);
        if (simulate_intersection(Duration::seconds(mid), movement, v_lt, p, cfg).pass) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return Duration::seconds(hi);
}

}  // namespace atma
