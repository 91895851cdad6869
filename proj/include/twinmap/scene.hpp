#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twinmap/format.hpp"
#include "twinmap/visibility.hpp"

namespace twinmap {

enum class CameraRole { cine, sensor };

struct SceneCamera {
    CameraRole role = CameraRole::sensor;
    CameraPose pose;
    CameraIntrinsics intrinsics;
};

/// Coverage scene:
///
///   bounds <minx> <miny> <minz> <maxx> <maxy> <maxz>
///   tile_size <meters>                       (default 100)
///   camera <cine|sensor> <x> <y> <z> <qx> <qy> <qz> <qw> <hfov_deg> <aspect> <near> <far>
///
/// At most one cine camera; '#' starts a comment line.
struct Scene {
    Aabb bounds;
    double tile_size = 100.0;
    std::vector<SceneCamera> cameras;

    TileGrid grid() const { return {bounds, tile_size}; }

    const SceneCamera *cine() const {
        for (const auto &c : cameras) {
            if (c.role == CameraRole::cine) return &c;
        }
        return nullptr;
    }

    std::vector<Frustum> sensor_frusta() const {
        std::vector<Frustum> out;
        for (const auto &c : cameras) {
            if (c.role == CameraRole::sensor) out.push_back(frustum_from(c.pose, c.intrinsics));
        }
        return out;
    }
};

inline Scene parse_scene(std::string_view text) {
    Scene scene;
    bool saw_bounds = false;
    const auto lines = split_lines(text);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const auto line = trim(lines[n]);
        if (line.empty() || line.front() == '#') continue;
        const std::string where = "scene line " + std::to_string(n + 1);
        const auto words = split_words(line);
        const auto numbers = [&](std::size_t first, std::size_t count) {
            if (words.size() != first + count) {
                throw ParseError(where + ": '" + std::string(words[0]) + "' expects " + std::to_string(count) + " values");
            }
            std::vector<double> v;
            for (std::size_t i = first; i < words.size(); ++i) {
                const auto x = parse_number<double>(words[i]);
                if (!x || !std::isfinite(*x)) throw ParseError(where + ": malformed number '" + std::string(words[i]) + "'");
                v.push_back(*x);
            }
            return v;
        };
        try {
            if (words[0] == "bounds") {
                const auto v = numbers(1, 6);
                scene.bounds = Aabb(Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]));
                saw_bounds = true;
            } else if (words[0] == "tile_size") {
                const auto v = numbers(1, 1);
                if (!(v[0] > 0.0)) throw ParseError(where + ": tile_size must be > 0");
                scene.tile_size = v[0];
            } else if (words[0] == "camera") {
                if (words.size() < 2) throw ParseError(where + ": camera role missing");
                SceneCamera cam;
                if (words[1] == "cine") {
                    cam.role = CameraRole::cine;
                    if (scene.cine()) throw ParseError(where + ": more than one cine camera");
                } else if (words[1] == "sensor") {
                    cam.role = CameraRole::sensor;
                } else {
                    throw ParseError(where + ": camera role must be 'cine' or 'sensor'");
                }
                const auto v = numbers(2, 11);
                cam.pose.position = Vec3(v[0], v[1], v[2]);
                cam.pose.orientation = Quat(v[6], v[3], v[4], v[5]);
                cam.intrinsics = {v[7], v[8], v[9], v[10]};
                cam.pose.validate();
                cam.intrinsics.validate();
                scene.cameras.push_back(cam);
            } else {
                throw ParseError(where + ": unknown keyword '" + std::string(words[0]) + "'");
            }
        } catch (const ParseError &) {
            throw;
        } catch (const InvalidArgument &e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    if (!saw_bounds) throw ParseError("scene has no bounds line");
    return scene;
}

inline std::string format_scene(const Scene &scene) {
    const auto num = [](double v) { return format_double(v); };
    std::string out = "bounds " + num(scene.bounds.min.x()) + " " + num(scene.bounds.min.y()) + " " +
                      num(scene.bounds.min.z()) + " " + num(scene.bounds.max.x()) + " " + num(scene.bounds.max.y()) +
                      " " + num(scene.bounds.max.z()) + "\n";
    out += "tile_size " + num(scene.tile_size) + "\n";
    for (const auto &c : scene.cameras) {
        const auto &p = c.pose.position;
        const auto &q = c.pose.orientation;
        const auto &i = c.intrinsics;
        out += std::string("camera ") + (c.role == CameraRole::cine ? "cine" : "sensor") + " " + num(p.x()) + " " +
               num(p.y()) + " " + num(p.z()) + " " + num(q.x()) + " " + num(q.y()) + " " + num(q.z()) + " " +
               num(q.w()) + " " + num(i.horizontal_fov_deg) + " " + num(i.aspect_ratio) + " " + num(i.near) + " " +
               num(i.far) + "\n";
    }
    return out;
}

inline std::string format_tile(const TileIndex &t) {
    return std::to_string(t.x) + "," + std::to_string(t.y) + "," + std::to_string(t.z);
}

inline std::string format_coverage(const CoverageReport &r) {
    std::string out = "# twinmap coverage report\n";
    out += std::string("covered = ") + (r.covered ? "true" : "false") + "\n";
    out += "sensor_visible_tiles = " + std::to_string(r.sensor_visible.size()) + "\n";
    out += "cine_visible_tiles = " + std::to_string(r.cine_visible.size()) + "\n";
    out += "missing_tiles = " + std::to_string(r.missing.size()) + "\n";
    out += "\n[missing]\n";
    for (const auto &t : r.missing) out += format_tile(t) + "\n";
    return out;
}

inline std::string format_missing_csv(const CoverageReport &r) {
    std::string out = "ix,iy,iz\n";
    for (const auto &t : r.missing) out += format_tile(t) + "\n";
    return out;
}

}  // namespace twinmap
