// Unit-safe scalar quantities and shared vehicle/road parameters.
//
// Canonical internal units are feet, seconds, ft/s and ft/s^2. Miles per
// hour exists only at API and CLI boundaries; every model formula below
// this layer is dimensionally consistent in ft/s.

#pragma once

#include <cmath>
#include <compare>
#include <stdexcept>
#include <string>

namespace atma {

inline constexpr double kMphToFps = 5280.0 / 3600.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double mph_to_fps(double mph) {
    if (mph < 0.0) {
        throw std::invalid_argument("mph_to_fps: negative speed " + std::to_string(mph));
    }
    return mph * kMphToFps;
}

inline double fps_to_mph(double fps) {
    if (fps < 0.0) {
        throw std::invalid_argument("fps_to_mph: negative speed " + std::to_string(fps));
    }
    return fps / kMphToFps;
}

/// Longitudinal speed, stored in ft/s.
class Speed {
  public:
    Speed() = default;
    static Speed from_fps(double fps) {
        if (fps < 0.0) {
            throw std::invalid_argument("Speed: negative value " + std::to_string(fps));
        }
        return Speed(fps);
    }
    static Speed from_mph(double mph) { return Speed(mph_to_fps(mph)); }

    double fps() const { return fps_; }
    double mph() const { return fps_ / kMphToFps; }

    auto operator<=>(const Speed&) const = default;

  private:
    explicit Speed(double fps) : fps_(fps) {}
    double fps_ = 0.0;
};

/// Non-negative length or gap, stored in feet. Signed longitudinal
/// quantities (gap errors, cross-track error, path positions) are plain
/// doubles in the code that owns them.
class Distance {
  public:
    Distance() = default;
    static Distance feet(double ft) {
        if (ft < 0.0) {
            throw std::invalid_argument("Distance: negative value " + std::to_string(ft));
        }
        return Distance(ft);
    }

    double ft() const { return ft_; }

    auto operator<=>(const Distance&) const = default;

  private:
    explicit Distance(double ft) : ft_(ft) {}
    double ft_ = 0.0;
};

/// Non-negative time interval in seconds.
class Duration {
  public:
    Duration() = default;
    static Duration seconds(double s) {
        if (s < 0.0) {
            throw std::invalid_argument("Duration: negative value " + std::to_string(s));
        }
        return Duration(s);
    }

    double s() const { return s_; }

    auto operator<=>(const Duration&) const = default;

  private:
    explicit Duration(double s) : s_(s) {}
    double s_ = 0.0;
};

/// Braking rate in ft/s^2, strictly positive.
class Deceleration {
  public:
    Deceleration() = default;
    static Deceleration fps2(double a) {
        if (a <= 0.0) {
            throw std::invalid_argument("Deceleration: must be > 0, got " + std::to_string(a));
        }
        return Deceleration(a);
    }

    double fps2() const { return a_; }

    auto operator<=>(const Deceleration&) const = default;

  private:
    explicit Deceleration(double a) : a_(a) {}
    double a_ = 12.4;
};

inline Distance operator*(Speed v, Duration t) { return Distance::feet(v.fps() * t.s()); }
inline Distance operator*(Duration t, Speed v) { return v * t; }
inline Distance operator+(Distance a, Distance b) { return Distance::feet(a.ft() + b.ft()); }

inline Duration operator/(Distance d, Speed v) {
    if (v.fps() <= 0.0) {
        throw std::domain_error("Distance/Speed: diverges at zero speed");
    }
    return Duration::seconds(d.ft() / v.fps());
}

inline Duration operator/(Speed v, Deceleration a) {
    return Duration::seconds(v.fps() / a.fps2());
}

struct VehicleSpec {
    Distance length = Distance::feet(40.0);
    Deceleration max_decel = Deceleration::fps2(12.4);
    Duration reaction_time = Duration::seconds(2.5);

    void validate() const {
        if (length.ft() <= 0.0) {
            throw std::invalid_argument("VehicleSpec: length must be > 0");
        }
    }
};

struct RoadGeometry {
    Distance lane_width = Distance::feet(12.0);
    int lanes_crossed = 4;
    Distance median_offset = Distance::feet(6.0);

    void validate() const {
        if (lane_width.ft() <= 0.0) {
            throw std::invalid_argument("RoadGeometry: lane_width must be > 0");
        }
        if (lanes_crossed < 1) {
            throw std::invalid_argument("RoadGeometry: lanes_crossed must be >= 1");
        }
    }
};

/// Length of the through movement across an intersection: one lane width
/// per crossed lane.
inline Distance intersection_length(const RoadGeometry& geom) {
    geom.validate();
    return Distance::feet(geom.lanes_crossed * geom.lane_width.ft());
}

inline Distance quarter_arc_length(Distance radius) {
    return Distance::feet(kPi * radius.ft() / 2.0);
}

/// Left-turn path: quarter-circle arc with turn radius
/// 2 * lane_width + median_offset.
inline Distance left_turn_path_length(const RoadGeometry& geom) {
    geom.validate();
    const double radius = 2.0 * geom.lane_width.ft() + geom.median_offset.ft();
    return quarter_arc_length(Distance::feet(radius));
}

}  // namespace atma
