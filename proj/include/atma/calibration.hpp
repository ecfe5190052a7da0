// Calibration of vehicle capability parameters from field measurements:
// maximum deceleration from emergency-stop runs and the follow-distance
// error percentile from gap-error series.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "atma/csv.hpp"
#include "atma/units.hpp"

namespace atma {

/// Standard deviation with divisor n. The stop-test statistics use the
/// population form; the sample form (n-1) gives 0.11 where 0.09 is expected.
inline double population_sd(std::span<const double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("population_sd: empty input");
    }
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(samples.size());
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(samples.size()));
}

struct StopTestRun {
    std::string button;         // which stop button triggered the run
    std::string set_gap_label;  // commanded gap as recorded, e.g. ">=100"
    double speed_mph = 0.0;
    int run_index = 0;
    double stop_time_s = 0.0;
    double stop_distance_ft = 0.0;
};

struct RunDecel {
    StopTestRun run;
    double decel_fps2 = 0.0;                // v / t, the calibrated estimate
    double decel_from_distance_fps2 = 0.0;  // v^2 / (2 d), diagnostic only
};

struct DecelGroup {
    double speed_mph = 0.0;
    std::vector<RunDecel> runs;  // sorted by run_index
    double avg_decel_fps2 = 0.0;
    double max_decel_fps2 = 0.0;
    double sd_stop_time_s = 0.0;
    double sd_stop_distance_ft = 0.0;
};

struct DecelCalibration {
    std::vector<DecelGroup> groups;  // sorted by set speed
    double max_decel_fps2 = 0.0;     // global max; the recommended alpha_lt
    std::vector<std::string> rejected_runs;
};

/// Per-run deceleration is v / t under the constant-deceleration
/// assumption; stop time is used rather than stop distance because its
/// measurement accuracy is considerably higher. The distance-based v^2/2d
/// value is kept as a diagnostic column.
inline DecelCalibration calibrate_deceleration(const std::vector<StopTestRun>& runs) {
    if (runs.empty()) {
        throw std::invalid_argument("calibrate_deceleration: no runs");
    }
    DecelCalibration out;
    std::map<double, std::vector<RunDecel>> by_speed;
    for (const auto& run : runs) {
        if (run.stop_time_s <= 0.0) {
            out.rejected_runs.push_back(run.button + " run " + std::to_string(run.run_index) +
                                        " at " + format_double(run.speed_mph) +
                                        " mph: stop_time must be > 0");
            continue;
        }
        const double v_fps = mph_to_fps(run.speed_mph);
        RunDecel rd;
        rd.run = run;
        rd.decel_fps2 = v_fps / run.stop_time_s;
        rd.decel_from_distance_fps2 =
            run.stop_distance_ft > 0.0 ? v_fps * v_fps / (2.0 * run.stop_distance_ft) : 0.0;
        by_speed[run.speed_mph].push_back(rd);
    }
    if (by_speed.empty()) {
        throw std::invalid_argument("calibrate_deceleration: all runs rejected");
    }

    out.max_decel_fps2 = 0.0;
    for (auto& [speed_mph, group_runs] : by_speed) {
        std::sort(group_runs.begin(), group_runs.end(),
                  [](const RunDecel& a, const RunDecel& b) { return a.run.run_index < b.run.run_index; });
        DecelGroup g;
        g.speed_mph = speed_mph;
        g.runs = group_runs;
        std::vector<double> decels, times, dists;
        for (const auto& rd : group_runs) {
            decels.push_back(rd.decel_fps2);
            times.push_back(rd.run.stop_time_s);
            dists.push_back(rd.run.stop_distance_ft);
        }
        double sum = 0.0;
        for (double d : decels) sum += d;
        g.avg_decel_fps2 = sum / static_cast<double>(decels.size());
        g.max_decel_fps2 = *std::max_element(decels.begin(), decels.end());
        g.sd_stop_time_s = population_sd(times);
        g.sd_stop_distance_ft = population_sd(dists);
        out.max_decel_fps2 = std::max(out.max_decel_fps2, g.max_decel_fps2);
        out.groups.push_back(std::move(g));
    }
    return out;
}

struct HistogramBin {
    double lo_ft = 0.0;
    double hi_ft = 0.0;
    std::size_t count = 0;
};

struct GapErrorCalibration {
    double epsilon_ft = 0.0;       // 95th percentile of positive errors
    std::size_t sample_count = 0;  // positive errors retained
    std::size_t total_count = 0;   // all input errors
    std::vector<HistogramBin> histogram;
    bool no_positive_errors = false;
};

/// Nearest-rank percentile: the ceil(p*n)-th order statistic, so the
/// result is always an observed sample value.
inline double nearest_rank_percentile(std::vector<double> sorted_ascending, double p) {
    if (sorted_ascending.empty()) {
        throw std::invalid_argument("nearest_rank_percentile: empty input");
    }
    const auto n = sorted_ascending.size();
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted_ascending[rank - 1];
}

/// Positive errors mean the actual gap fell short of the commanded gap;
/// only those contribute to the minimum-follow-distance allowance.
inline GapErrorCalibration calibrate_gap_error(std::span<const double> errors_ft,
                                               double bin_width_ft = 1.0) {
    if (errors_ft.empty()) {
        throw std::invalid_argument("calibrate_gap_error: empty error series");
    }
    if (bin_width_ft <= 0.0) {
        throw std::invalid_argument("calibrate_gap_error: bin width must be > 0");
    }
    GapErrorCalibration out;
    out.total_count = errors_ft.size();

    std::vector<double> positive;
    for (double e : errors_ft) {
        if (e > 0.0) positive.push_back(e);
    }
    out.sample_count = positive.size();
    if (positive.empty()) {
        out.no_positive_errors = true;
        out.epsilon_ft = 0.0;
    } else {
        std::sort(positive.begin(), positive.end());
        out.epsilon_ft = nearest_rank_percentile(positive, 0.95);
    }

    // Histogram over the full signed series for reporting.
    const auto [lo_it, hi_it] = std::minmax_element(errors_ft.begin(), errors_ft.end());
    const auto lo_bin = static_cast<long>(std::floor(*lo_it / bin_width_ft));
    const auto hi_bin = static_cast<long>(std::floor(*hi_it / bin_width_ft));
    out.histogram.resize(static_cast<std::size_t>(hi_bin - lo_bin + 1));
    for (std::size_t i = 0; i < out.histogram.size(); ++i) {
        out.histogram[i].lo_ft = (lo_bin + static_cast<long>(i)) * bin_width_ft;
        out.histogram[i].hi_ft = out.histogram[i].lo_ft + bin_width_ft;
    }
    for (double e : errors_ft) {
        auto bin = static_cast<long>(std::floor(e / bin_width_ft));
        bin = std::clamp(bin, lo_bin, hi_bin);  // guard the max landing on the edge
        out.histogram[static_cast<std::size_t>(bin - lo_bin)].count++;
    }
    return out;
}

/// Stop-test CSV: header `button,set_gap,speed_mph,run,stop_time_s,stop_dist_ft`.
inline std::vector<StopTestRun> parse_stop_test_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("stop-test csv: empty file");
    }
    const std::vector<std::string> expected = {"button", "set_gap",     "speed_mph",
                                               "run",    "stop_time_s", "stop_dist_ft"};
    const auto header = split_csv_line(line);
    if (header.size() != expected.size()) {
        throw FormatError("stop-test csv: expected 6 header fields, found " +
                          std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (normalize_header_token(header[i]) != expected[i]) {
            throw FormatError("stop-test csv: header column " + std::to_string(i + 1) +
                              " should be '" + expected[i] + "', found '" + header[i] + "'");
        }
    }
    std::vector<StopTestRun> runs;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 6) {
            throw FormatError("stop-test csv row " + std::to_string(row) + ": expected 6 fields");
        }
        StopTestRun run;
        run.button = fields[0];
        run.set_gap_label = fields[1];
        const auto speed = parse_double(fields[2]);
        const auto idx = parse_int(fields[3]);
        const auto time = parse_double(fields[4]);
        const auto dist = parse_double(fields[5]);
        if (!speed || !idx || !time || !dist) {
            throw FormatError("stop-test csv row " + std::to_string(row) + ": bad numeric field");
        }
        run.speed_mph = *speed;
        run.run_index = static_cast<int>(*idx);
        run.stop_time_s = *time;
        run.stop_distance_ft = *dist;
        runs.push_back(std::move(run));
    }
    return runs;
}

}  // namespace atma
