#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <limits>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "twinmap/geometry.hpp"

namespace twinmap {

/// Camera placement in the world. The camera looks along its local +x axis,
/// local +y points left and local +z up.
struct CameraPose {
    Vec3 position = Vec3::Zero();
    Quat orientation = Quat::Identity();

    void validate() const {
        if (!all_finite(position)) throw InvalidArgument("camera position must be finite");
        if (std::abs(orientation.norm() - 1.0) > 1e-6) throw InvalidArgument("camera orientation is not a unit quaternion");
    }

    /// Looking straight down (-z) with the image top toward world +x.
    static Quat top_down() { return Quat(Eigen::AngleAxisd(std::numbers::pi / 2.0, Vec3::UnitY())); }
};

struct CameraIntrinsics {
    double horizontal_fov_deg = 90.0;
    double aspect_ratio = 1.0;  // width / height
    double near = 0.1;          // meters
    double far = 1000.0;        // meters

    void validate() const {
        if (!(horizontal_fov_deg > 0.0) || !(horizontal_fov_deg < 180.0)) {
            throw InvalidArgument("horizontal field of view must lie in (0, 180) degrees");
        }
        if (!(aspect_ratio > 0.0) || !std::isfinite(aspect_ratio)) throw InvalidArgument("aspect ratio must be > 0");
        if (!(near > 0.0)) throw InvalidArgument("near plane must be > 0");
        if (!(far > near) || !std::isfinite(far)) throw InvalidArgument("far plane must exceed the near plane");
    }

    double half_horizontal_rad() const { return horizontal_fov_deg * std::numbers::pi / 360.0; }

    /// tan(v/2) = tan(h/2) / aspect
    double half_vertical_rad() const { return std::atan(std::tan(half_horizontal_rad()) / aspect_ratio); }

    double vertical_fov_deg() const { return half_vertical_rad() * 360.0 / std::numbers::pi; }
};

/// Oriented plane; points with signed_distance >= 0 are on the inner side.
struct Plane {
    Vec3 normal = Vec3::UnitX();
    double offset = 0.0;

    // Fixed evaluation order: the box test and the point test must round
    // identically for the no-false-negative guarantee.
    double signed_distance(const Vec3 &p) const {
        return normal.x() * p.x() + normal.y() * p.y() + normal.z() * p.z() + offset;
    }
};

struct Frustum {
    std::array<Plane, 6> planes;  // near, far, left, right, top, bottom
    std::array<Vec3, 8> corners;
    std::array<Vec3, 6> edges;  // four lateral edge directions, camera left and up axes
    Aabb corner_bounds;

    bool contains(const Vec3 &p) const {
        for (const auto &pl : planes) {
            if (pl.signed_distance(p) < 0.0) return false;
        }
        return true;
    }

    /// Separating-axis test of the frustum hull against a box. Never false
    /// for a box that truly meets the frustum; axes only separate with a
    /// small positive gap, so boxes grazing the surface count as visible.
    bool intersects(const Aabb &box) const {
        if (!corner_bounds.overlaps(box)) return false;
        for (const auto &pl : planes) {
            const Vec3 &n = pl.normal;
            const Vec3 positive(n.x() >= 0.0 ? box.max.x() : box.min.x(), n.y() >= 0.0 ? box.max.y() : box.min.y(),
                                n.z() >= 0.0 ? box.max.z() : box.min.z());
            if (pl.signed_distance(positive) < 0.0) return false;
        }
        const Vec3 center = box.center();
        const Vec3 half = 0.5 * box.extent();
        const double scale = 1.0 + corner_bounds.min.cwiseAbs().cwiseMax(corner_bounds.max.cwiseAbs())
                                       .cwiseMax(box.min.cwiseAbs())
                                       .cwiseMax(box.max.cwiseAbs())
                                       .maxCoeff();
        for (const auto &e : edges) {
            for (int a = 0; a < 3; ++a) {
                const Vec3 axis = e.cross(Vec3::Unit(a));
                const double len = axis.norm();
                if (len < 1e-9 * e.norm()) continue;
                double lo = std::numeric_limits<double>::infinity(), hi = -lo;
                for (const auto &c : corners) {
                    const double d = axis.dot(c);
                    lo = std::min(lo, d);
                    hi = std::max(hi, d);
                }
                const double mid = axis.dot(center);
                const double radius = half.dot(axis.cwiseAbs());
                const double tol = 1e-9 * scale * len;
                if (hi < mid - radius - tol || lo > mid + radius + tol) return false;
            }
        }
        return true;
    }
};

inline Frustum frustum_from(const CameraPose &pose, const CameraIntrinsics &intr) {
    pose.validate();
    intr.validate();
    const Mat3 r = pose.orientation.normalized().toRotationMatrix();
    const double h = intr.half_horizontal_rad();
    const double v = intr.half_vertical_rad();

    const std::array<Plane, 6> local{{
        {Vec3(1.0, 0.0, 0.0), -intr.near},
        {Vec3(-1.0, 0.0, 0.0), intr.far},
        {Vec3(std::sin(h), -std::cos(h), 0.0), 0.0},
        {Vec3(std::sin(h), std::cos(h), 0.0), 0.0},
        {Vec3(std::sin(v), 0.0, -std::cos(v)), 0.0},
        {Vec3(std::sin(v), 0.0, std::cos(v)), 0.0},
    }};
    Frustum f;
    for (std::size_t i = 0; i < local.size(); ++i) {
        const Vec3 n = (r * local[i].normal).normalized();
        f.planes[i] = {n, local[i].offset - n.dot(pose.position)};
    }

    const double th = std::tan(h), tv = std::tan(v);
    std::size_t c = 0;
    for (const double depth : {intr.near, intr.far}) {
        for (const double sy : {-1.0, 1.0}) {
            for (const double sz : {-1.0, 1.0}) {
                f.corners[c++] = r * Vec3(depth, sy * depth * th, sz * depth * tv) + pose.position;
            }
        }
    }
    // Corner order: near then far, each (-y,-z), (-y,+z), (+y,-z), (+y,+z).
    for (std::size_t i = 0; i < 4; ++i) f.edges[i] = f.corners[i + 4] - f.corners[i];
    f.edges[4] = r.col(1);
    f.edges[5] = r.col(2);
    Vec3 lo = f.corners[0], hi = f.corners[0];
    for (const auto &p : f.corners) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    // Pad for rounding in the corner construction.
    const Vec3 pad = Vec3::Constant(1e-9) + 1e-12 * lo.cwiseAbs().cwiseMax(hi.cwiseAbs());
    f.corner_bounds = Aabb(lo - pad, hi + pad);
    return f;
}

struct TileIndex {
    long x = 0;
    long y = 0;
    long z = 0;

    friend auto operator<=>(const TileIndex &, const TileIndex &) = default;
};

using TileSet = std::set<TileIndex>;

/// Uniform single-level decomposition of `bounds` into cubes of `tile_size`;
/// the last tile on each axis is clipped to the bounds.
class TileGrid {
public:
    TileGrid(const Aabb &bounds, double tile_size) : bounds_(bounds), tile_size_(tile_size) {
        if (!(tile_size > 0.0) || !std::isfinite(tile_size)) throw InvalidArgument("tile size must be > 0");
        const Vec3 ext = bounds.extent();
        for (int a = 0; a < 3; ++a) {
            counts_[a] = std::max(1L, static_cast<long>(std::ceil(ext[a] / tile_size - 1e-9)));
        }
    }

    const Aabb &bounds() const { return bounds_; }
    double tile_size() const { return tile_size_; }
    const std::array<long, 3> &counts() const { return counts_; }
    std::size_t tile_count() const { return static_cast<std::size_t>(counts_[0] * counts_[1] * counts_[2]); }

    bool valid(const TileIndex &t) const {
        return t.x >= 0 && t.x < counts_[0] && t.y >= 0 && t.y < counts_[1] && t.z >= 0 && t.z < counts_[2];
    }

    Aabb tile_box(const TileIndex &t) const {
        const std::array<long, 3> idx{t.x, t.y, t.z};
        Vec3 lo, hi;
        for (int a = 0; a < 3; ++a) {
            lo[a] = bounds_.min[a] + static_cast<double>(idx[a]) * tile_size_;
            hi[a] = idx[a] + 1 == counts_[a] ? bounds_.max[a]
                                              : bounds_.min[a] + static_cast<double>(idx[a] + 1) * tile_size_;
        }
        return {lo, hi};
    }

    /// Tile containing `p`, which must lie inside the bounds.
    TileIndex tile_of(const Vec3 &p) const {
        std::array<long, 3> idx{};
        for (int a = 0; a < 3; ++a) {
            const long i = static_cast<long>(std::floor((p[a] - bounds_.min[a]) / tile_size_));
            idx[a] = std::clamp(i, 0L, counts_[a] - 1);
        }
        return {idx[0], idx[1], idx[2]};
    }

    std::vector<TileIndex> all_tiles() const {
        std::vector<TileIndex> out;
        out.reserve(tile_count());
        for (long x = 0; x < counts_[0]; ++x)
            for (long y = 0; y < counts_[1]; ++y)
                for (long z = 0; z < counts_[2]; ++z) out.push_back({x, y, z});
        return out;
    }

private:
    Aabb bounds_;
    double tile_size_;
    std::array<long, 3> counts_{};
};

/// Tiles whose box meets the frustum by the six-plane test.
inline TileSet visible_tiles(const Frustum &f, const TileGrid &grid) {
    TileSet out;
    const Aabb &b = grid.bounds();
    if (!f.corner_bounds.overlaps(b)) return out;
    std::array<long, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
        const auto cell = [&](double c) {
            const long i = static_cast<long>(std::floor((c - b.min[a]) / grid.tile_size()));
            return std::clamp(i, 0L, grid.counts()[a] - 1);
        };
        // One tile of slack absorbs rounding at tile boundaries.
        lo[a] = std::max(0L, cell(std::max(f.corner_bounds.min[a], b.min[a])) - 1);
        hi[a] = std::min(grid.counts()[a] - 1, cell(std::min(f.corner_bounds.max[a], b.max[a])) + 1);
    }
    for (long x = lo[0]; x <= hi[0]; ++x)
        for (long y = lo[1]; y <= hi[1]; ++y)
            for (long z = lo[2]; z <= hi[2]; ++z) {
                const TileIndex t{x, y, z};
                if (f.intersects(grid.tile_box(t))) out.insert(t);
            }
    return out;
}

struct CoverageReport {
    TileSet sensor_visible;
    TileSet cine_visible;
    TileSet missing;  // sensor_visible \ cine_visible
    bool covered = true;
};

inline CoverageReport coverage_from_sets(TileSet sensor_visible, TileSet cine_visible) {
    CoverageReport r;
    r.sensor_visible = std::move(sensor_visible);
    r.cine_visible = std::move(cine_visible);
    std::set_difference(r.sensor_visible.begin(), r.sensor_visible.end(), r.cine_visible.begin(),
                        r.cine_visible.end(), std::inserter(r.missing, r.missing.end()));
    r.covered = r.missing.empty();
    return r;
}

inline TileSet sensor_tiles(std::span<const Frustum> sensors, const TileGrid &grid) {
    TileSet out;
    for (const auto &s : sensors) out.merge(visible_tiles(s, grid));
    return out;
}

inline CoverageReport coverage_check(const Frustum &cine, std::span<const Frustum> sensors, const TileGrid &grid) {
    if (sensors.empty()) throw InvalidArgument("coverage_check needs at least one sensor frustum");
    return coverage_from_sets(sensor_tiles(sensors, grid), visible_tiles(cine, grid));
}

struct CinePlacement {
    CameraPose pose;
    double altitude = 0.0;  // meters above the top of the sensor-visible region
    CoverageReport report;
};

/// Top-down cine-camera pose over the sensor-visible region at the lowest
/// altitude (doubling, then bisection to 1 m) whose view loads every
/// sensor-visible tile. Throws PlacementError when even an altitude equal to
/// the far-plane distance falls short.
inline CinePlacement place_cine_camera(std::span<const Frustum> sensors, const TileGrid &grid,
                                       const CameraIntrinsics &intr) {
    intr.validate();
    if (sensors.empty()) throw InvalidArgument("place_cine_camera needs at least one sensor frustum");
    constexpr double kTolerance = 1.0;

    const TileSet needed = sensor_tiles(sensors, grid);
    Aabb region = needed.empty() ? grid.bounds() : grid.tile_box(*needed.begin());
    for (const auto &t : needed) region = region.merged(grid.tile_box(t));
    const Vec3 center = region.center();

    const auto pose_at = [&](double altitude) {
        return CameraPose{Vec3(center.x(), center.y(), region.max.z() + altitude), CameraPose::top_down()};
    };
    const auto report_at = [&](double altitude) {
        return coverage_from_sets(needed, visible_tiles(frustum_from(pose_at(altitude), intr), grid));
    };

    double lo = 0.0;
    double hi = std::min(1.0, intr.far);
    while (!report_at(hi).covered) {
        if (hi >= intr.far) {
            throw PlacementError("region exceeds cine-camera range: no altitude up to the far plane (" +
                                 std::to_string(intr.far) + " m) covers the sensor-visible tiles");
        }
        lo = hi;
        hi = std::min(2.0 * hi, intr.far);
    }
    while (hi - lo > kTolerance) {
        const double mid = 0.5 * (lo + hi);
        if (report_at(mid).covered) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {pose_at(hi), hi, report_at(hi)};
}

}  // namespace twinmap
