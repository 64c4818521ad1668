#pragma once

#include <json.hpp>
#include <string>

#include "kicksim/simharness.hpp"

namespace kicksim {

namespace detail {

inline Vec3 vec3_from_json(const nlohmann::json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 3)
        throw ParseError(key + ": expected an array of 3 numbers");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

template <typename T>
void maybe(const nlohmann::json& j, const std::string& key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}

inline void maybe_vec3(const nlohmann::json& j, const std::string& key, Vec3& out) {
    if (j.contains(key))
        out = vec3_from_json(j.at(key), key);
}

} // namespace detail

inline RobotParams robot_params_from_json(const nlohmann::json& j) {
    RobotParams p = RobotParams::crazyflie();
    detail::maybe(j, "mass_kg", p.mass);
    detail::maybe(j, "arm_length_m", p.arm_length);
    detail::maybe(j, "thrust_coeff", p.thrust_coeff);
    detail::maybe(j, "moment_coeff", p.moment_coeff);
    detail::maybe(j, "gravity_mps2", p.gravity);
    if (j.contains("inertia_kgm2")) {
        const auto& i = j.at("inertia_kgm2");
        if (i.is_array() && i.size() == 3) {
            p.inertia = Vec3(i[0].get<double>(), i[1].get<double>(),
                             i[2].get<double>()).asDiagonal();
        } else if (i.is_array() && i.size() == 9) {
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    p.inertia(r, c) = i[3 * r + c].get<double>();
        } else {
            throw ParseError("inertia_kgm2: expected 3 diagonal or 9 row-major entries");
        }
    }
    if (!p.valid())
        throw ParseError("robot parameters violate their invariants");
    return p;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (j.contains("robot"))
        cfg.robot = robot_params_from_json(j.at("robot"));

    if (j.contains("controller")) {
        const auto& c = j.at("controller");
        if (c.contains("type")) {
            std::string type = c.at("type").get<std::string>();
            if (type == "pid")
                cfg.controller_type = ControllerType::pid;
            else if (type == "geometric")
                cfg.controller_type = ControllerType::geometric;
            else
                throw ParseError("controller.type must be 'pid' or 'geometric'");
        }
        if (c.contains("geometric")) {
            const auto& g = c.at("geometric");
            detail::maybe_vec3(g, "k_position", cfg.geometric_gains.k_position);
            detail::maybe_vec3(g, "k_velocity", cfg.geometric_gains.k_velocity);
            detail::maybe_vec3(g, "k_rotation", cfg.geometric_gains.k_rotation);
            detail::maybe_vec3(g, "k_angular_rate", cfg.geometric_gains.k_angular_rate);
        }
        if (c.contains("pid")) {
            const auto& p = c.at("pid");
            detail::maybe_vec3(p, "position_kp", cfg.pid_gains.position_kp);
            detail::maybe_vec3(p, "position_ki", cfg.pid_gains.position_ki);
            detail::maybe_vec3(p, "position_kd", cfg.pid_gains.position_kd);
            detail::maybe_vec3(p, "attitude_kp", cfg.pid_gains.attitude_kp);
            detail::maybe_vec3(p, "rate_kp", cfg.pid_gains.rate_kp);
            detail::maybe_vec3(p, "rate_ki", cfg.pid_gains.rate_ki);
            detail::maybe_vec3(p, "rate_kd", cfg.pid_gains.rate_kd);
            detail::maybe_vec3(p, "integrator_limit", cfg.pid_gains.integrator_limit);
        }
    }

    detail::maybe(j, "physics_rate_hz", cfg.physics_rate);
    if (j.contains("command_rate_hz") && !j.at("command_rate_hz").is_null())
        cfg.command_rate_override = j.at("command_rate_hz").get<double>();
    detail::maybe(j, "trajectory", cfg.trajectory_source);
    if (j.contains("workspace")) {
        const auto& w = j.at("workspace");
        detail::maybe_vec3(w, "origin", cfg.workspace_origin);
        detail::maybe(w, "scale", cfg.workspace_scale);
    }
    detail::maybe(j, "settle_s", cfg.settle_seconds);
    detail::maybe(j, "command_latency_s", cfg.command_latency);
    detail::maybe(j, "divergence_bound_m", cfg.divergence_bound);
    detail::maybe(j, "seed", cfg.seed);
    detail::maybe(j, "condition", cfg.condition);
    if (j.contains("allocation")) {
        std::string a = j.at("allocation").get<std::string>();
        if (a == "strict")
            cfg.allocation = AllocationMode::strict;
        else if (a == "saturate")
            cfg.allocation = AllocationMode::saturate;
        else
            throw ParseError("allocation must be 'strict' or 'saturate'");
    }
    if (j.contains("initial_state")) {
        const auto& s = j.at("initial_state");
        RigidBodyState state;
        detail::maybe_vec3(s, "position", state.position);
        detail::maybe_vec3(s, "velocity", state.linear_velocity);
        detail::maybe_vec3(s, "angular_velocity", state.angular_velocity);
        cfg.initial_state = state;
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    ExperimentConfig cfg = experiment_config_from_json(j);
    // trajectory paths are relative to the config file
    if (!cfg.trajectory_source.empty() && cfg.trajectory_source.front() != '/') {
        auto slash = path.find_last_of('/');
        if (slash != std::string::npos)
            cfg.trajectory_source = path.substr(0, slash + 1) + cfg.trajectory_source;
    }
    return cfg;
}

/// Sidecar metadata file for a track CSV: same path with a `.meta.json`
/// suffix in place of `.csv`.
inline std::string sidecar_path(const std::string& track_path) {
    auto dot = track_path.rfind(".csv");
    if (dot == track_path.size() - 4)
        return track_path.substr(0, dot) + ".meta.json";
    return track_path + ".meta.json";
}

struct TrackMetadata {
    double frame_rate_hz = 0.0;
    double pixels_per_meter = 0.0;
    std::string subject_id;
    std::string segment_id;
};

inline TrackMetadata load_track_metadata(const std::string& track_path) {
    std::string meta_path = sidecar_path(track_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(meta_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(meta_path + ": " + e.what());
    }
    TrackMetadata m;
    m.frame_rate_hz = j.at("frame_rate_hz").get<double>();
    m.pixels_per_meter = j.at("pixels_per_meter").get<double>();
    detail::maybe(j, "subject_id", m.subject_id);
    detail::maybe(j, "segment_id", m.segment_id);
    if (!(m.frame_rate_hz > 0.0) || !(m.pixels_per_meter > 0.0))
        throw ParseError(meta_path + ": frame_rate_hz and pixels_per_meter must be positive");
    return m;
}

/// Loads, calibrates, resamples and workspace-maps the configured track.
/// Fills in the config's subject/segment labels from the sidecar.
inline Trajectory load_trajectory(ExperimentConfig& config) {
    RawTrack raw = load_track(config.trajectory_source);
    TrackMetadata meta = load_track_metadata(config.trajectory_source);
    raw.frame_rate = meta.frame_rate_hz;
    raw.subject_id = meta.subject_id;
    raw.segment_id = meta.segment_id;
    if (config.subject_id.empty())
        config.subject_id = meta.subject_id;
    if (config.segment_id.empty())
        config.segment_id = meta.segment_id;

    Trajectory traj = calibrate(raw, Calibration{meta.pixels_per_meter});
    if (config.command_rate_override)
        traj = resample(traj, *config.command_rate_override);
    return to_workspace(traj, config.workspace_origin, config.workspace_scale);
}

inline FlightLog run_tracking_sim(ExperimentConfig config) {
    Trajectory traj = load_trajectory(config);
    return run_tracking_sim(config, traj);
}

} // namespace kicksim
