// Parsers for the leader-truck and follower-truck telemetry CSV logs,
// plus gap-error extraction and per-session summaries.
//
// Malformed data rows are skipped with a positional warning; only a
// malformed header (or an empty file) is fatal. gps_stamp (integer ms) is
// the analysis time axis: the wall-clock column repeats tenths.

#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atma/calibration.hpp"
#include "atma/csv.hpp"

namespace atma {

enum class OperatingMode { Idle, Rollout, Run };

inline std::optional<OperatingMode> parse_operating_mode(std::string_view token) {
    const std::string t = normalize_header_token(token);
    if (t == "idle") return OperatingMode::Idle;
    if (t == "rollout") return OperatingMode::Rollout;
    if (t == "run") return OperatingMode::Run;
    return std::nullopt;
}

inline const char* to_string(OperatingMode m) {
    switch (m) {
        case OperatingMode::Idle: return "IDLE";
        case OperatingMode::Rollout: return "ROLLOUT";
        case OperatingMode::Run: return "RUN";
    }
    return "?";
}

/// Wall-clock time of day, tenth-second resolution as logged.
struct TimeOfDay {
    int hour = 0;
    int minute = 0;
    double second = 0.0;

    double seconds_since_midnight() const { return hour * 3600.0 + minute * 60.0 + second; }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%02d:%02d:%04.1f", hour, minute, second);
        return buf;
    }
};

inline std::optional<TimeOfDay> parse_time_of_day(std::string_view s) {
    s = trim(s);
    const auto c1 = s.find(':');
    if (c1 == std::string_view::npos) return std::nullopt;
    const auto c2 = s.find(':', c1 + 1);
    if (c2 == std::string_view::npos) return std::nullopt;
    const auto hour = parse_int(s.substr(0, c1));
    const auto minute = parse_int(s.substr(c1 + 1, c2 - c1 - 1));
    const auto second = parse_double(s.substr(c2 + 1));
    if (!hour || !minute || !second) return std::nullopt;
    if (*hour < 0 || *hour > 23 || *minute < 0 || *minute > 59 || *second < 0.0 ||
        *second >= 60.0) {
        return std::nullopt;
    }
    return TimeOfDay{static_cast<int>(*hour), static_cast<int>(*minute), *second};
}

struct LeaderRecord {
    TimeOfDay timestamp;
    std::string veh_tag;
    long long crumb_id = 0;
    long long gps_stamp_ms = 0;
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    double alt = 0.0;  // meters as logged
    double heading_deg = 0.0;
    double velocity = 0.0;  // as logged; see summary notes on units

    std::string to_csv_row() const {
        return timestamp.to_string() + "," + veh_tag + "," + std::to_string(crumb_id) + "," +
               std::to_string(gps_stamp_ms) + "," + format_double(lat_deg) + "," +
               format_double(lon_deg) + "," + format_double(alt) + "," +
               format_double(heading_deg) + "," + format_double(velocity);
    }
};

struct FollowerRecord {
    TimeOfDay timestamp;
    std::string veh_tag;
    long long crumb_id = 0;
    long long gps_stamp_ms = 0;
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    double alt = 0.0;
    double heading_deg = 0.0;
    double heading_desired_deg = 0.0;
    double velocity = 0.0;
    double velocity_desired = 0.0;
    double gap_ft = 0.0;
    double gap_desired_ft = 0.0;
    int num_sats = 0;
    bool gps_valid = false;
    double cte_ft = 0.0;  // signed cross-track error
    double accel_cmd = 0.0;
    double steer_cmd = 0.0;
    OperatingMode state = OperatingMode::Idle;

    std::string to_csv_row() const {
        return timestamp.to_string() + "," + veh_tag + "," + std::to_string(crumb_id) + "," +
               std::to_string(gps_stamp_ms) + "," + format_double(lat_deg) + "," +
               format_double(lon_deg) + "," + format_double(alt) + "," +
               format_double(heading_deg) + "," + format_double(heading_desired_deg) + "," +
               format_double(velocity) + "," + format_double(velocity_desired) + "," +
               format_double(gap_ft) + "," + format_double(gap_desired_ft) + "," +
               std::to_string(num_sats) + "," + (gps_valid ? "1" : "0") + "," +
               format_double(cte_ft) + "," + format_double(accel_cmd) + "," +
               format_double(steer_cmd) + "," + to_string(state);
    }
};

template <typename Record>
struct ParseResult {
    std::vector<Record> records;
    std::vector<std::string> warnings;  // "row N: ..." with N the data-row index
};

namespace detail {

inline const std::array<const char*, 9> kLeaderHeader = {
    "timestamp", "veh", "crumb", "stamp", "lat", "lon", "alt", "heading", "velocity"};

inline const std::array<const char*, 19> kFollowerHeader = {
    "timestamp", "veh", "crumb", "stamp", "lat", "lon", "alt", "heading", "hdg(desired)",
    "velocity", "vel(desired)", "gap", "gap(desired)", "#sats", "valid", "cte", "accel",
    "steer", "state"};

template <std::size_t N>
void check_header(std::istream& in, const std::array<const char*, N>& expected,
                  const char* what) {
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) {
        throw FormatError(std::string(what) + ": empty file");
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != N) {
        throw FormatError(std::string(what) + ": expected " + std::to_string(N) +
                          " header columns, found " + std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < N; ++i) {
        const std::string got = normalize_header_token(fields[i]);
        if (got == expected[i]) continue;
        // The leader tag column appears as VEH in the files and LCB in the
        // column documentation; accept both.
        if (i == 1 && got == "lcb") continue;
        throw FormatError(std::string(what) + ": header column " + std::to_string(i + 1) +
                          " should be '" + expected[i] + "', found '" + fields[i] + "'");
    }
}

}  // namespace detail

inline ParseResult<LeaderRecord> parse_leader_log(std::istream& in) {
    detail::check_header(in, detail::kLeaderHeader, "leader log");
    ParseResult<LeaderRecord> out;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        const std::string where = "row " + std::to_string(row);
        if (f.size() != 9) {
            out.warnings.push_back(where + ": expected 9 fields, found " +
                                   std::to_string(f.size()));
            continue;
        }
        LeaderRecord rec;
        const auto ts = parse_time_of_day(f[0]);
        const auto crumb = parse_int(f[2]);
        const auto stamp = parse_int(f[3]);
        const auto lat = parse_double(f[4]);
        const auto lon = parse_double(f[5]);
        const auto alt = parse_double(f[6]);
        const auto heading = parse_double(f[7]);
        const auto velocity = parse_double(f[8]);
        if (!ts || !crumb || !stamp || !lat || !lon || !alt || !heading || !velocity) {
            out.warnings.push_back(where + ": unparseable field");
            continue;
        }
        if (*crumb < 0) {
            out.warnings.push_back(where + ": negative crumb id");
            continue;
        }
        if (*heading < 0.0 || *heading >= 360.0) {
            out.warnings.push_back(where + ": heading outside [0, 360)");
            continue;
        }
        rec.timestamp = *ts;
        rec.veh_tag = f[1];
        rec.crumb_id = *crumb;
        rec.gps_stamp_ms = *stamp;
        rec.lat_deg = *lat;
        rec.lon_deg = *lon;
        rec.alt = *alt;
        rec.heading_deg = *heading;
        rec.velocity = *velocity;
        out.records.push_back(std::move(rec));
    }
    return out;
}

inline ParseResult<FollowerRecord> parse_follower_log(std::istream& in) {
    detail::check_header(in, detail::kFollowerHeader, "follower log");
    ParseResult<FollowerRecord> out;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        const std::string where = "row " + std::to_string(row);
        if (f.size() != 19) {
            out.warnings.push_back(where + ": expected 19 fields, found " +
                                   std::to_string(f.size()));
            continue;
        }
        FollowerRecord rec;
        const auto ts = parse_time_of_day(f[0]);
        const auto crumb = parse_int(f[2]);
        const auto stamp = parse_int(f[3]);
        const auto lat = parse_double(f[4]);
        const auto lon = parse_double(f[5]);
        const auto alt = parse_double(f[6]);
        const auto heading = parse_double(f[7]);
        const auto heading_des = parse_double(f[8]);
        const auto velocity = parse_double(f[9]);
        const auto velocity_des = parse_double(f[10]);
        const auto gap = parse_double(f[11]);
        const auto gap_des = parse_double(f[12]);
        const auto sats = parse_int(f[13]);
        const auto valid = parse_int(f[14]);
        const auto cte = parse_double(f[15]);
        const auto accel = parse_double(f[16]);
        const auto steer = parse_double(f[17]);
        const auto state = parse_operating_mode(f[18]);
        if (!ts || !crumb || !stamp || !lat || !lon || !alt || !heading || !heading_des ||
            !velocity || !velocity_des || !gap || !gap_des || !sats || !valid || !cte ||
            !accel || !steer) {
            out.warnings.push_back(where + ": unparseable field");
            continue;
        }
        if (!state) {
            out.warnings.push_back(where + ": unknown state token '" + f[18] + "'");
            continue;
        }
        if (*crumb < 0 || *sats < 0) {
            out.warnings.push_back(where + ": negative count field");
            continue;
        }
        if (*valid != 0 && *valid != 1) {
            out.warnings.push_back(where + ": VALID flag must be 0 or 1");
            continue;
        }
        if (*heading < 0.0 || *heading >= 360.0) {
            out.warnings.push_back(where + ": heading outside [0, 360)");
            continue;
        }
        rec.timestamp = *ts;
        rec.veh_tag = f[1];
        rec.crumb_id = *crumb;
        rec.gps_stamp_ms = *stamp;
        rec.lat_deg = *lat;
        rec.lon_deg = *lon;
        rec.alt = *alt;
        rec.heading_deg = *heading;
        rec.heading_desired_deg = *heading_des;
        rec.velocity = *velocity;
        rec.velocity_desired = *velocity_des;
        rec.gap_ft = *gap;
        rec.gap_desired_ft = *gap_des;
        rec.num_sats = static_cast<int>(*sats);
        rec.gps_valid = (*valid == 1);
        rec.cte_ft = *cte;
        rec.accel_cmd = *accel;
        rec.steer_cmd = *steer;
        rec.state = *state;
        out.records.push_back(std::move(rec));
    }
    return out;
}

struct LogSession {
    std::vector<LeaderRecord> leader;
    std::vector<FollowerRecord> follower;
    std::string leader_path;
    std::string follower_path;
    std::vector<std::string> warnings;
};

inline LogSession make_session(std::vector<LeaderRecord> leader,
                               std::vector<FollowerRecord> follower,
                               std::string leader_path = {}, std::string follower_path = {},
                               std::vector<std::string> parse_warnings = {}) {
    LogSession s;
    s.leader = std::move(leader);
    s.follower = std::move(follower);
    s.leader_path = std::move(leader_path);
    s.follower_path = std::move(follower_path);
    s.warnings = std::move(parse_warnings);
    for (std::size_t i = 1; i < s.leader.size(); ++i) {
        if (s.leader[i].gps_stamp_ms < s.leader[i - 1].gps_stamp_ms) {
            s.warnings.push_back("leader row " + std::to_string(i + 1) + ": gps_stamp decreased");
        }
    }
    for (std::size_t i = 1; i < s.follower.size(); ++i) {
        if (s.follower[i].gps_stamp_ms < s.follower[i - 1].gps_stamp_ms) {
            s.warnings.push_back("follower row " + std::to_string(i + 1) +
                                 ": gps_stamp decreased");
        }
    }
    return s;
}

struct ModeFilter {
    bool idle = false;
    bool rollout = false;
    bool run = true;

    static ModeFilter all() { return {true, true, true}; }
    static ModeFilter run_only() { return {false, false, true}; }

    bool accepts(OperatingMode m) const {
        switch (m) {
            case OperatingMode::Idle: return idle;
            case OperatingMode::Rollout: return rollout;
            case OperatingMode::Run: return run;
        }
        return false;
    }
};

/// Signed gap errors, desired minus actual: positive means the truck is
/// following closer than commanded.
inline std::vector<double> gap_error_series(std::span<const FollowerRecord> records,
                                            ModeFilter filter = ModeFilter::run_only()) {
    std::vector<double> errors;
    for (const auto& rec : records) {
        if (filter.accepts(rec.state)) {
            errors.push_back(rec.gap_desired_ft - rec.gap_ft);
        }
    }
    return errors;
}

struct SessionSummary {
    std::size_t leader_count = 0;
    std::size_t follower_count = 0;
    std::size_t idle_count = 0;
    std::size_t rollout_count = 0;
    std::size_t run_count = 0;
    double leader_span_s = 0.0;    // gps_stamp extent
    double follower_span_s = 0.0;
    double max_abs_cte_ft = 0.0;
    bool has_gap_stats = false;    // follower rows present
    double gap_error_mean_ft = 0.0;
    double gap_error_sd_ft = 0.0;  // population SD
};

inline SessionSummary session_summary(const LogSession& session) {
    SessionSummary s;
    s.leader_count = session.leader.size();
    s.follower_count = session.follower.size();
    if (session.leader.size() > 1) {
        s.leader_span_s =
            (session.leader.back().gps_stamp_ms - session.leader.front().gps_stamp_ms) / 1000.0;
    }
    if (session.follower.size() > 1) {
        s.follower_span_s =
            (session.follower.back().gps_stamp_ms - session.follower.front().gps_stamp_ms) /
            1000.0;
    }
    std::vector<double> errors;
    for (const auto& rec : session.follower) {
        switch (rec.state) {
            case OperatingMode::Idle: s.idle_count++; break;
            case OperatingMode::Rollout: s.rollout_count++; break;
            case OperatingMode::Run: s.run_count++; break;
        }
        s.max_abs_cte_ft = std::max(s.max_abs_cte_ft, std::fabs(rec.cte_ft));
        errors.push_back(rec.gap_desired_ft - rec.gap_ft);
    }
    if (!errors.empty()) {
        s.has_gap_stats = true;
        double sum = 0.0;
        for (double e : errors) sum += e;
        s.gap_error_mean_ft = sum / static_cast<double>(errors.size());
        s.gap_error_sd_ft = population_sd(errors);
    }
    return s;
}

}  // namespace atma
