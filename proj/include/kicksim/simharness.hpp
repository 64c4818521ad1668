#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kicksim/control.hpp"
#include "kicksim/dynamics.hpp"
#include "kicksim/io_util.hpp"
#include "kicksim/metrics.hpp"
#include "kicksim/trajectory.hpp"

namespace kicksim {

enum class ControllerType { pid, geometric };

inline std::string to_string(ControllerType t) {
    return t == ControllerType::pid ? "pid" : "geometric";
}

/// Everything one deterministic run needs. Identical configs produce
/// bit-identical logs.
struct ExperimentConfig {
    ControllerType controller_type = ControllerType::geometric;
    GeometricGains geometric_gains = GeometricGains::defaults();
    PidGains pid_gains = PidGains::defaults();
    RobotParams robot = RobotParams::crazyflie();

    double physics_rate = 500.0;                 // Hz
    std::optional<double> command_rate_override; // Hz; default: trajectory rate
    std::string trajectory_source;               // track CSV (sidecar .meta.json beside it)
    Vec3 workspace_origin = Vec3(0.0, 0.0, 1.0);
    double workspace_scale = 1.0;
    double settle_seconds = 2.0;    // hover at the first setpoint before replay
    double command_latency = 0.0;   // s; emulates transport delay to the plant
    double divergence_bound = 10.0; // m
    AllocationMode allocation = AllocationMode::saturate;
    std::optional<RigidBodyState> initial_state; // default: hover at first setpoint
    long seed = 0;                               // reserved; runs are deterministic

    std::string condition = "sim"; // label carried into evaluation rows
    std::string subject_id;
    std::string segment_id;
};

/// Paired commanded/achieved time series from one run, one record per
/// physics step.
struct FlightLog {
    struct Record {
        double t = 0.0;
        Eigen::Vector2d commanded = Eigen::Vector2d::Zero(); // (x, z)
        Vec3 actual = Vec3::Zero();
        ControlWrench wrench;
        bool saturated = false;
    };
    std::vector<Record> records;
    std::map<std::string, std::string> metadata;
    bool diverged = false;
    std::string failure_reason;

    double command_rate() const { return std::stod(metadata.at("command_rate_hz")); }
    double settle_seconds() const { return std::stod(metadata.at("settle_s")); }
    double physics_rate() const { return std::stod(metadata.at("physics_rate_hz")); }
    size_t setpoint_count() const {
        return static_cast<size_t>(std::stoul(metadata.at("n_setpoints")));
    }
};

/// Replays `traj` as position setpoints (zero-order hold at the command
/// rate) through the configured controller and dynamics.
inline FlightLog run_tracking_sim(const ExperimentConfig& config,
                                  const Trajectory& traj) {
    if (traj.points.empty())
        throw Error("run_tracking_sim: empty trajectory");
    double command_rate = traj.sample_rate;
    if (!(config.physics_rate >= command_rate))
        throw Error("run_tracking_sim: physics rate below command rate");

    const double dt = 1.0 / config.physics_rate;
    const auto n_setpoints = traj.points.size();
    const double duration = traj.duration();
    const auto n_steps = static_cast<size_t>(
        std::ceil(config.physics_rate * (config.settle_seconds + duration)));

    FlightLog log;
    log.metadata["condition"] = config.condition;
    log.metadata["controller"] = to_string(config.controller_type);
    log.metadata["subject_id"] = config.subject_id;
    log.metadata["segment_id"] = config.segment_id;
    log.metadata["physics_rate_hz"] = format_double(config.physics_rate);
    log.metadata["command_rate_hz"] = format_double(command_rate);
    log.metadata["settle_s"] = format_double(config.settle_seconds);
    log.metadata["command_latency_s"] = format_double(config.command_latency);
    log.metadata["n_setpoints"] = std::to_string(n_setpoints);
    log.records.reserve(n_steps);

    auto setpoint_position = [&](size_t index) {
        return Vec3(traj.points[index].x(), config.workspace_origin.y(),
                    traj.points[index].y());
    };

    RigidBodyState state;
    if (config.initial_state) {
        state = *config.initial_state;
    } else {
        state.position = setpoint_position(0);
    }

    ControllerState pid_memory;
    ControlWrench previous_wrench;
    previous_wrench.collective_thrust = config.robot.mass * config.robot.gravity;

    for (size_t k = 0; k < n_steps; ++k) {
        double t = static_cast<double>(k) * dt;

        // latest sample with t_sample <= t (zero-order hold, no lookahead)
        auto held_index = [&](double t_cmd) {
            if (t_cmd <= 0.0)
                return size_t{0};
            return std::min(static_cast<size_t>(t_cmd * command_rate),
                            n_setpoints - 1);
        };
        // the controller sees the (possibly latency-delayed) command; the
        // log records the undelayed reference
        size_t ref_index = held_index(t - config.settle_seconds);
        size_t ctrl_index =
            held_index(t - config.settle_seconds - config.command_latency);
        Setpoint sp;
        sp.position = setpoint_position(ctrl_index);

        ControlResult cmd;
        if (config.controller_type == ControllerType::geometric) {
            cmd = geometric_control(state, sp, config.geometric_gains,
                                    config.robot, previous_wrench);
        } else {
            cmd = pid_cascade_control(state, sp, config.pid_gains, pid_memory,
                                      dt, config.robot);
        }
        previous_wrench = cmd.wrench;

        AllocationResult alloc =
            rotors_from_wrench(cmd.wrench, config.robot, config.allocation);

        FlightLog::Record rec;
        rec.t = t;
        rec.commanded = traj.points[ref_index];
        rec.actual = state.position;
        rec.wrench = alloc.achieved;
        rec.saturated = alloc.saturated || cmd.thrust_clamped;
        log.records.push_back(rec);

        try {
            state = step(state, alloc.rotors, config.robot, dt);
        } catch (const NonFiniteState& e) {
            log.diverged = true;
            log.failure_reason = e.what();
            return log;
        }
        if (state.position.norm() > config.divergence_bound) {
            log.diverged = true;
            log.failure_reason = "position exceeded divergence bound";
            return log;
        }
    }
    return log;
}

struct ComparisonSeries {
    Series commanded_x, commanded_z;
    Series actual_x, actual_z;
};

/// Downsamples a log to one (commanded, actual) pair per setpoint, with
/// the settle-in period excluded.
inline ComparisonSeries extract_comparison_series(const FlightLog& log) {
    if (log.records.empty())
        throw Error("extract_comparison_series: empty log");
    double command_rate = log.command_rate();
    double settle = log.settle_seconds();
    double physics_rate = log.physics_rate();
    size_t n = log.setpoint_count();

    ComparisonSeries out;
    out.commanded_x.sample_rate = out.commanded_z.sample_rate = command_rate;
    out.actual_x.sample_rate = out.actual_z.sample_rate = command_rate;
    for (size_t k = 0; k < n; ++k) {
        double t = settle + static_cast<double>(k) / command_rate;
        auto idx = std::min(static_cast<size_t>(std::llround(t * physics_rate)),
                            log.records.size() - 1);
        const auto& rec = log.records[idx];
        out.commanded_x.values.push_back(rec.commanded.x());
        out.commanded_z.values.push_back(rec.commanded.y());
        out.actual_x.values.push_back(rec.actual.x());
        out.actual_z.values.push_back(rec.actual.z());
    }
    return out;
}

/// FlightLog CSV: `# key=value` metadata lines, then
/// `t,cmd_x,cmd_z,x,y,z,thrust,mx,my,mz,saturated`.
inline std::string flightlog_to_csv(const FlightLog& log) {
    std::string out;
    for (const auto& [key, value] : log.metadata)
        out += "# " + key + "=" + value + "\n";
    if (log.diverged)
        out += "# diverged=" + log.failure_reason + "\n";
    out += "t,cmd_x,cmd_z,x,y,z,thrust,mx,my,mz,saturated\n";
    for (const auto& r : log.records) {
        out += format_double(r.t);
        for (double v : {r.commanded.x(), r.commanded.y(), r.actual.x(),
                         r.actual.y(), r.actual.z(), r.wrench.collective_thrust,
                         r.wrench.moment.x(), r.wrench.moment.y(),
                         r.wrench.moment.z()}) {
            out += ',';
            out += format_double(v);
        }
        out += r.saturated ? ",1\n" : ",0\n";
    }
    return out;
}

inline FlightLog flightlog_from_csv(const std::string& path) {
    std::string content = read_file(path);
    std::istringstream in(content);
    FlightLog log;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::string ctx = path + ":" + std::to_string(lineno);
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError(ctx + ": malformed metadata line");
            std::string key = line.substr(2, eq - 2);
            if (key == "diverged") {
                log.diverged = true;
                log.failure_reason = line.substr(eq + 1);
            } else {
                log.metadata[key] = line.substr(eq + 1);
            }
            continue;
        }
        if (!header_seen) {
            if (line != "t,cmd_x,cmd_z,x,y,z,thrust,mx,my,mz,saturated")
                throw ParseError(ctx + ": unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 11)
            throw ParseError(ctx + ": expected 11 fields, got " +
                             std::to_string(fields.size()));
        FlightLog::Record r;
        r.t = parse_double(fields[0], ctx);
        r.commanded = Eigen::Vector2d(parse_double(fields[1], ctx),
                                      parse_double(fields[2], ctx));
        r.actual = Vec3(parse_double(fields[3], ctx), parse_double(fields[4], ctx),
                        parse_double(fields[5], ctx));
        r.wrench.collective_thrust = parse_double(fields[6], ctx);
        r.wrench.moment = Vec3(parse_double(fields[7], ctx),
                               parse_double(fields[8], ctx),
                               parse_double(fields[9], ctx));
        r.saturated = fields[10] == "1";
        log.records.push_back(r);
    }
    if (!header_seen)
        throw ParseError(path + ": missing header");
    for (const char* key : {"command_rate_hz", "settle_s", "physics_rate_hz",
                            "n_setpoints"})
        if (!log.metadata.count(key))
            throw ParseError(path + ": missing metadata key " + std::string(key));
    return log;
}

} // namespace kicksim
