// JSON bindings: run configuration (model + sim + grid), scenario files,
// and result serialization for the CLI. Kept out of the core headers so
// the models stay dependency-free.

#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "atma/calibration.hpp"
#include "atma/guidance.hpp"
#include "atma/log_ingest.hpp"
#include "atma/simulator.hpp"

namespace atma {

using Json = nlohmann::ordered_json;

inline double round_to(double x, double unit) { return std::round(x / unit) * unit; }

inline Json to_json(const ModelParams& p) {
    return Json{{"alpha_lt_fps2", p.alpha_lt.fps2()},
                {"alpha_gv_comfort_fps2", p.alpha_gv_comfort.fps2()},
                {"alpha_gv_emergency_fps2", p.alpha_gv_emergency.fps2()},
                {"reaction_time_s", p.reaction_time.s()},
                {"epsilon_ft", p.epsilon.ft()},
                {"gap_command_ft", p.gap_command.ft()},
                {"ffs_mph", p.ffs.mph()},
                {"truck",
                 {{"length_ft", p.truck.length.ft()},
                  {"max_decel_fps2", p.truck.max_decel.fps2()},
                  {"reaction_time_s", p.truck.reaction_time.s()}}},
                {"geometry",
                 {{"lane_width_ft", p.geometry.lane_width.ft()},
                  {"lanes_crossed", p.geometry.lanes_crossed},
                  {"median_offset_ft", p.geometry.median_offset.ft()}}}};
}

inline ModelParams model_params_from_json(const Json& j, ModelParams base = {}) {
    ModelParams p = base;
    if (j.contains("alpha_lt_fps2")) p.alpha_lt = Deceleration::fps2(j["alpha_lt_fps2"]);
    if (j.contains("alpha_gv_comfort_fps2")) {
        p.alpha_gv_comfort = Deceleration::fps2(j["alpha_gv_comfort_fps2"]);
    }
    if (j.contains("alpha_gv_emergency_fps2")) {
        p.alpha_gv_emergency = Deceleration::fps2(j["alpha_gv_emergency_fps2"]);
    }
    if (j.contains("reaction_time_s")) p.reaction_time = Duration::seconds(j["reaction_time_s"]);
    if (j.contains("epsilon_ft")) p.epsilon = Distance::feet(j["epsilon_ft"]);
    if (j.contains("gap_command_ft")) p.gap_command = Distance::feet(j["gap_command_ft"]);
    if (j.contains("ffs_mph")) p.ffs = Speed::from_mph(j["ffs_mph"]);
    if (j.contains("truck")) {
        const auto& t = j["truck"];
        if (t.contains("length_ft")) p.truck.length = Distance::feet(t["length_ft"]);
        if (t.contains("max_decel_fps2")) p.truck.max_decel = Deceleration::fps2(t["max_decel_fps2"]);
        if (t.contains("reaction_time_s")) {
            p.truck.reaction_time = Duration::seconds(t["reaction_time_s"]);
        }
    }
    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        if (g.contains("lane_width_ft")) p.geometry.lane_width = Distance::feet(g["lane_width_ft"]);
        if (g.contains("lanes_crossed")) p.geometry.lanes_crossed = g["lanes_crossed"];
        if (g.contains("median_offset_ft")) {
            p.geometry.median_offset = Distance::feet(g["median_offset_ft"]);
        }
    }
    return p;
}

inline Json to_json(const SimConfig& c) {
    return Json{{"dt_s", c.dt_s},
                {"horizon_s", c.horizon_s},
                {"gv_length_ft", c.gv_length_ft},
                {"bisection_tol_s", c.bisection_tol_s}};
}

inline SimConfig sim_config_from_json(const Json& j, SimConfig base = {}) {
    SimConfig c = base;
    if (j.contains("dt_s")) c.dt_s = j["dt_s"];
    if (j.contains("horizon_s")) c.horizon_s = j["horizon_s"];
    if (j.contains("gv_length_ft")) c.gv_length_ft = j["gv_length_ft"];
    if (j.contains("bisection_tol_s")) c.bisection_tol_s = j["bisection_tol_s"];
    c.validate();
    return c;
}

inline Json to_json(const GridSpec& g) {
    return Json{{"start_mph", g.start_mph}, {"stop_mph", g.stop_mph}, {"step_mph", g.step_mph}};
}

inline GridSpec grid_from_json(const Json& j, GridSpec base = {}) {
    GridSpec g = base;
    if (j.contains("start_mph")) g.start_mph = j["start_mph"];
    if (j.contains("stop_mph")) g.stop_mph = j["stop_mph"];
    if (j.contains("step_mph")) g.step_mph = j["step_mph"];
    return g;
}

/// Merged run configuration: built-in defaults overlaid by an optional
/// JSON file, overlaid by CLI flags (applied by the caller).
struct RunConfig {
    ModelParams model;
    SimConfig sim;
    GridSpec grid;
};

inline RunConfig run_config_from_json(const Json& j) {
    RunConfig rc;
    if (j.contains("model")) rc.model = model_params_from_json(j["model"]);
    if (j.contains("sim")) rc.sim = sim_config_from_json(j["sim"]);
    if (j.contains("grid")) rc.grid = grid_from_json(j["grid"]);
    return rc;
}

inline Json to_json(const RunConfig& rc) {
    return Json{{"model", to_json(rc.model)}, {"sim", to_json(rc.sim)}, {"grid", to_json(rc.grid)}};
}

inline Json to_json(const LeaderRecord& r) {
    return Json{{"timestamp", r.timestamp.to_string()},
                {"veh", r.veh_tag},
                {"crumb", r.crumb_id},
                {"stamp", r.gps_stamp_ms},
                {"lat", r.lat_deg},
                {"lon", r.lon_deg},
                {"alt", r.alt},
                {"heading", r.heading_deg},
                {"velocity", r.velocity}};
}

inline Json to_json(const FollowerRecord& r) {
    return Json{{"timestamp", r.timestamp.to_string()},
                {"veh", r.veh_tag},
                {"crumb", r.crumb_id},
                {"stamp", r.gps_stamp_ms},
                {"lat", r.lat_deg},
                {"lon", r.lon_deg},
                {"alt", r.alt},
                {"heading", r.heading_deg},
                {"heading_desired", r.heading_desired_deg},
                {"velocity", r.velocity},
                {"velocity_desired", r.velocity_desired},
                {"gap_ft", r.gap_ft},
                {"gap_desired_ft", r.gap_desired_ft},
                {"num_sats", r.num_sats},
                {"gps_valid", r.gps_valid},
                {"cte_ft", r.cte_ft},
                {"accel_cmd", r.accel_cmd},
                {"steer_cmd", r.steer_cmd},
                {"state", to_string(r.state)}};
}

inline Json to_json(const SessionSummary& s) {
    Json j{{"leader_count", s.leader_count},
           {"follower_count", s.follower_count},
           {"mode_counts",
            {{"IDLE", s.idle_count}, {"ROLLOUT", s.rollout_count}, {"RUN", s.run_count}}},
           {"leader_span_s", s.leader_span_s},
           {"follower_span_s", s.follower_span_s},
           {"max_abs_cte_ft", s.max_abs_cte_ft}};
    if (s.has_gap_stats) {
        j["gap_error_mean_ft"] = s.gap_error_mean_ft;
        j["gap_error_sd_ft"] = s.gap_error_sd_ft;
    }
    return j;
}

inline Json to_json(const DecelCalibration& c) {
    Json groups = Json::array();
    for (const auto& g : c.groups) {
        Json runs = Json::array();
        for (const auto& rd : g.runs) {
            runs.push_back({{"button", rd.run.button},
                            {"set_gap", rd.run.set_gap_label},
                            {"run", rd.run.run_index},
                            {"stop_time_s", rd.run.stop_time_s},
                            {"stop_distance_ft", rd.run.stop_distance_ft},
                            {"decel_fps2", rd.decel_fps2},
                            {"decel_from_distance_fps2", rd.decel_from_distance_fps2}});
        }
        groups.push_back({{"speed_mph", g.speed_mph},
                          {"runs", runs},
                          {"avg_decel_fps2", g.avg_decel_fps2},
                          {"max_decel_fps2", g.max_decel_fps2},
                          {"sd_stop_time_s", g.sd_stop_time_s},
                          {"sd_stop_distance_ft", g.sd_stop_distance_ft},
                          {"paper_rounded",
                           {{"avg_decel_fps2", round_to(g.avg_decel_fps2, 0.1)},
                            {"max_decel_fps2", round_to(g.max_decel_fps2, 0.1)},
                            {"sd_stop_time_s", round_to(g.sd_stop_time_s, 0.01)},
                            {"sd_stop_distance_ft", round_to(g.sd_stop_distance_ft, 0.01)}}}});
    }
    Json j{{"groups", groups},
           {"max_decel_fps2", c.max_decel_fps2},
           {"recommended_alpha_lt_fps2", c.max_decel_fps2},
           {"paper_rounded", {{"recommended_alpha_lt_fps2", round_to(c.max_decel_fps2, 0.1)}}}};
    if (!c.rejected_runs.empty()) j["rejected_runs"] = c.rejected_runs;
    return j;
}

inline Json to_json(const GapErrorCalibration& c) {
    Json bins = Json::array();
    for (const auto& b : c.histogram) {
        bins.push_back({{"lo_ft", b.lo_ft}, {"hi_ft", b.hi_ft}, {"count", b.count}});
    }
    Json j{{"epsilon_ft", c.epsilon_ft},
           {"sample_count", c.sample_count},
           {"total_count", c.total_count},
           {"histogram", bins}};
    if (c.no_positive_errors) {
        j["warning"] = "no positive gap errors in the series; epsilon forced to 0";
    }
    return j;
}

inline Json to_json(const GuidanceThresholds& t) {
    Json rows = Json::array();
    for (const auto& r : t.rows) {
        rows.push_back({{"speed_mph", r.speed_mph},
                        {"s_lt_ft", r.s_lt_ft},
                        {"s_ft_ft", r.s_ft_ft},
                        {"t_c_s", r.t_c_s},
                        {"t_straight_s", r.t_straight_s},
                        {"t_turn_s", r.t_turn_s},
                        {"paper_rounded",
                         {{"s_lt_ft", round_to(r.s_lt_ft, 1.0)},
                          {"s_ft_ft", round_to(r.s_ft_ft, 1.0)},
                          {"t_c_s", round_to(r.t_c_s, 1.0)},
                          {"t_straight_s", round_to(r.t_straight_s, 1.0)},
                          {"t_turn_s", round_to(r.t_turn_s, 1.0)}}},
                        {"saf",
                         {{"s_lt", r.saf_s_lt},
                          {"s_ft", r.saf_s_ft},
                          {"t_c", r.saf_t_c},
                          {"t_straight", r.saf_t_straight},
                          {"t_turn", r.saf_t_turn}}}});
    }
    return Json{{"rows", rows}, {"notes", t.notes}};
}

inline Json to_json(const SafetyOutcome& o) {
    Json events = Json::array();
    for (const auto& e : o.events) events.push_back(e.to_string());
    return Json{{"collision", o.collision},
                {"safe", o.safe()},
                {"min_headway_s", o.min_headway_s},
                {"min_spacing_ft", o.min_spacing_ft},
                {"conditions",
                 {{"lead_gap_ok", o.lead_gap_ok},
                  {"change_window_ok", o.change_window_ok},
                  {"lag_gap_ok", o.lag_gap_ok}}},
                {"slacks_s",
                 {{"lead_gap", o.lead_gap_slack_s},
                  {"change_window", o.change_window_slack_s},
                  {"lag_gap", o.lag_gap_slack_s}}},
                {"events", events}};
}

inline Json to_json(const IntersectionResult& r) {
    Json events = Json::array();
    for (const auto& e : r.events) events.push_back(e.to_string());
    return Json{{"pass", r.pass},
                {"required_s", r.required_s},
                {"margin_s", r.margin_s},
                {"events", events}};
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
    return j;
}

inline void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << "time_s,position_ft,speed_fps,lane\n";
    for (const auto& s : traj.samples) {
        out << format_double(s.t_s) << ',' << format_double(s.position_ft) << ','
            << format_double(s.speed_fps) << ',' << s.lane << '\n';
    }
}

}  // namespace atma
