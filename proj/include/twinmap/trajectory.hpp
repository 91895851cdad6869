#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "twinmap/format.hpp"
#include "twinmap/geometry.hpp"

namespace twinmap {

struct Pose {
    double timestamp = 0.0;  // seconds
    Vec3 position = Vec3::Zero();
    Quat orientation = Quat::Identity();
};

/// Time-ordered poses: strictly increasing timestamps, unit quaternions.
struct Trajectory {
    std::vector<Pose> poses;

    std::size_t size() const { return poses.size(); }

    void validate() const {
        for (std::size_t i = 0; i < poses.size(); ++i) {
            if (std::abs(poses[i].orientation.norm() - 1.0) > 1e-6) {
                throw InvalidArgument("pose " + std::to_string(i) + " has a non-unit quaternion");
            }
            if (i > 0 && !(poses[i].timestamp > poses[i - 1].timestamp)) {
                throw InvalidArgument("pose " + std::to_string(i) + " timestamp is not strictly increasing");
            }
        }
    }
};

inline Trajectory transform_trajectory(const Trajectory &traj, const RigidTransform &t) {
    Quat q_r(t.rotation());
    // w >= 0 keeps the sign of transformed orientations continuous with the
    // inputs, so a transform followed by its inverse reproduces them.
    if (q_r.w() < 0.0) q_r.coeffs() = -q_r.coeffs();
    Trajectory out;
    out.poses.reserve(traj.size());
    for (const auto &p : traj.poses) {
        out.poses.push_back({p.timestamp, t.apply(p.position), (q_r * p.orientation).normalized()});
    }
    return out;
}

/// "timestamp tx ty tz qx qy qz qw" per line; '#' comments and blank lines
/// are skipped. Errors carry the 1-based line number.
inline Trajectory parse_trajectory(std::string_view text) {
    Trajectory traj;
    const auto lines = split_lines(text);
    double last_time = 0.0;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const auto line = trim(lines[n]);
        if (line.empty() || line.front() == '#') continue;
        const std::string where = "trajectory line " + std::to_string(n + 1);
        const auto words = split_words(line);
        if (words.size() != 8) throw ParseError(where + ": expected 8 values, got " + std::to_string(words.size()));
        double v[8];
        for (int i = 0; i < 8; ++i) {
            const auto x = parse_number<double>(words[i]);
            if (!x || !std::isfinite(*x)) throw ParseError(where + ": malformed number '" + std::string(words[i]) + "'");
            v[i] = *x;
        }
        Pose pose{v[0], Vec3(v[1], v[2], v[3]), Quat(v[7], v[4], v[5], v[6])};
        if (std::abs(pose.orientation.norm() - 1.0) > 1e-6) throw ParseError(where + ": quaternion is not unit-norm");
        if (!traj.poses.empty() && !(pose.timestamp > last_time)) {
            throw ParseError(where + ": timestamp is not strictly increasing");
        }
        last_time = pose.timestamp;
        traj.poses.push_back(pose);
    }
    return traj;
}

inline std::string format_trajectory(const Trajectory &traj) {
    std::string out;
    for (const auto &p : traj.poses) {
        const auto &q = p.orientation;
        out += format_double(p.timestamp) + " " + format_double(p.position.x()) + " " +
               format_double(p.position.y()) + " " + format_double(p.position.z()) + " " + format_double(q.x()) +
               " " + format_double(q.y()) + " " + format_double(q.z()) + " " + format_double(q.w()) + "\n";
    }
    return out;
}

/// Plot-ready CSV (x, y, z for top-down overlays, plus the orientation).
inline std::string format_trajectory_csv(const Trajectory &traj) {
    std::string out = "timestamp,x,y,z,qx,qy,qz,qw\n";
    for (const auto &p : traj.poses) {
        const auto &q = p.orientation;
        out += format_double(p.timestamp) + "," + format_double(p.position.x()) + "," +
               format_double(p.position.y()) + "," + format_double(p.position.z()) + "," + format_double(q.x()) +
               "," + format_double(q.y()) + "," + format_double(q.z()) + "," + format_double(q.w()) + "\n";
    }
    return out;
}

}  // namespace twinmap
