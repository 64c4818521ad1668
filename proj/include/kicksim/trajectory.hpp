#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kicksim/dynamics.hpp"
#include "kicksim/errors.hpp"
#include "kicksim/io_util.hpp"

namespace kicksim {

/// Digitized ankle track: pixel coordinates per video frame.
struct RawTrack {
    struct Sample {
        long frame = 0;
        double x_px = 0.0;
        double y_px = 0.0;
    };
    std::vector<Sample> samples;
    double frame_rate = 0.0; // Hz
    std::string subject_id;
    std::string segment_id;
};

struct Calibration {
    double pixels_per_meter = 0.0;
};

/// Uniformly sampled planar (x, z) setpoint sequence in meters.
/// Implicit timestamps t_k = k / sample_rate.
struct Trajectory {
    double sample_rate = 0.0; // Hz
    std::vector<Eigen::Vector2d> points;

    double duration() const {
        return static_cast<double>(points.size()) / sample_rate;
    }
};

// Gaps longer than this are treated as broken tracks rather than
// interpolation candidates.
inline constexpr double kMaxGapSeconds = 0.5;

/// Parses a track CSV (`frame,x_px,y_px`). Frame indices must be
/// strictly increasing.
inline RawTrack load_track(const std::string& path) {
    std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line))
        throw EmptyTrack(path + ": empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "frame,x_px,y_px")
        throw ParseError(path + ":1: expected header 'frame,x_px,y_px', got '" + line + "'");

    RawTrack track;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto fields = split_csv_line(line);
        std::string ctx = path + ":" + std::to_string(lineno);
        if (fields.size() != 3)
            throw ParseError(ctx + ": expected 3 fields, got " + std::to_string(fields.size()));
        RawTrack::Sample s;
        s.frame = static_cast<long>(parse_double(fields[0], ctx));
        s.x_px = parse_double(fields[1], ctx);
        s.y_px = parse_double(fields[2], ctx);
        if (!track.samples.empty() && s.frame <= track.samples.back().frame)
            throw NonMonotonicFrames(ctx + ": frame " + std::to_string(s.frame) +
                                     " not greater than previous");
        track.samples.push_back(s);
    }
    if (track.samples.empty())
        throw EmptyTrack(path + ": no samples");
    return track;
}

/// Pixels to meters with the image y axis flipped into world z (image y
/// grows downward). Missing frames are filled by linear interpolation.
inline Trajectory calibrate(const RawTrack& raw, const Calibration& cal) {
    double ppm = cal.pixels_per_meter;
    double y_max = 0.0;
    for (const auto& s : raw.samples)
        y_max = std::max(y_max, s.y_px);

    Trajectory traj;
    traj.sample_rate = raw.frame_rate;
    for (size_t k = 0; k + 1 < raw.samples.size(); ++k) {
        const auto& a = raw.samples[k];
        const auto& b = raw.samples[k + 1];
        long gap = b.frame - a.frame;
        if (static_cast<double>(gap) / raw.frame_rate > kMaxGapSeconds)
            throw GapTooLarge("gap of " + std::to_string(gap) + " frames after frame " +
                              std::to_string(a.frame) + " exceeds " +
                              std::to_string(kMaxGapSeconds) + " s");
        for (long j = 0; j < gap; ++j) {
            double w = static_cast<double>(j) / static_cast<double>(gap);
            double x = a.x_px + w * (b.x_px - a.x_px);
            double y = a.y_px + w * (b.y_px - a.y_px);
            traj.points.emplace_back(x / ppm, (y_max - y) / ppm);
        }
    }
    const auto& last = raw.samples.back();
    traj.points.emplace_back(last.x_px / ppm, (y_max - last.y_px) / ppm);
    return traj;
}

/// Linear interpolation onto a uniform grid at new_rate over the same
/// time span. Exact on affine-in-time signals.
inline Trajectory resample(const Trajectory& traj, double new_rate) {
    if (!(new_rate > 0.0))
        throw Error("resample: rate must be positive");
    Trajectory out;
    out.sample_rate = new_rate;
    size_t n = traj.points.size();
    if (n == 1) {
        out.points = traj.points;
        return out;
    }
    double t_end = static_cast<double>(n - 1) / traj.sample_rate;
    auto count = static_cast<size_t>(std::floor(t_end * new_rate + 1e-9)) + 1;
    out.points.reserve(count);
    for (size_t j = 0; j < count; ++j) {
        double t = static_cast<double>(j) / new_rate;
        double pos = std::min(t * traj.sample_rate, static_cast<double>(n - 1));
        auto i = static_cast<size_t>(pos);
        if (i >= n - 1) {
            out.points.push_back(traj.points[n - 1]);
        } else {
            double w = pos - static_cast<double>(i);
            out.points.push_back(traj.points[i] +
                                 w * (traj.points[i + 1] - traj.points[i]));
        }
    }
    // endpoint preserved exactly when the grid lands on it
    if (std::abs(static_cast<double>(count - 1) / new_rate - t_end) < 1e-12)
        out.points.back() = traj.points.back();
    return out;
}

/// Centers the trajectory, scales it, and places it at `origin` in the
/// robot's x-z workspace.
inline Trajectory to_workspace(const Trajectory& traj, const Vec3& origin,
                               double scale) {
    if (!(scale > 0.0))
        throw Error("to_workspace: scale must be positive");
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : traj.points)
        centroid += p;
    centroid /= static_cast<double>(traj.points.size());

    Trajectory out;
    out.sample_rate = traj.sample_rate;
    out.points.reserve(traj.points.size());
    Eigen::Vector2d base(origin.x(), origin.z());
    for (const auto& p : traj.points)
        out.points.push_back(base + scale * (p - centroid));
    return out;
}

/// Trajectory CSV export: header `t,x,z`, SI units, full precision.
inline std::string trajectory_to_csv(const Trajectory& traj) {
    std::string out = "t,x,z\n";
    for (size_t k = 0; k < traj.points.size(); ++k) {
        out += format_double(static_cast<double>(k) / traj.sample_rate);
        out += ',';
        out += format_double(traj.points[k].x());
        out += ',';
        out += format_double(traj.points[k].y());
        out += '\n';
    }
    return out;
}

} // namespace kicksim
