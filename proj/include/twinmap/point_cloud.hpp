#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "twinmap/geometry.hpp"

namespace twinmap {

using Color = std::array<std::uint8_t, 3>;

/// Ordered 3D points in meters with optional per-point RGB.
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Color> colors;  // empty, or one entry per point

    PointCloud() = default;
    explicit PointCloud(std::vector<Vec3> pts) : points(std::move(pts)) {}

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_colors() const { return !colors.empty(); }

    /// Throws InvalidArgument on non-finite coordinates or a color/point length mismatch.
    void validate() const {
        if (!colors.empty() && colors.size() != points.size()) {
            throw InvalidArgument("color count does not match point count");
        }
        for (const auto &p : points) {
            if (!all_finite(p)) throw InvalidArgument("point cloud contains a non-finite coordinate");
        }
    }

    Aabb bounds() const {
        if (points.empty()) throw InvalidArgument("bounds of an empty point cloud");
        Vec3 lo = points.front(), hi = points.front();
        for (const auto &p : points) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        return {lo, hi};
    }

    friend bool operator==(const PointCloud &a, const PointCloud &b) {
        return a.points == b.points && a.colors == b.colors;
    }
};

inline PointCloud transform_cloud(const PointCloud &cloud, const RigidTransform &t) {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto &p : cloud.points) out.points.push_back(t.apply(p));
    out.colors = cloud.colors;
    return out;
}

/// Points inside the closed box, original order kept.
inline PointCloud crop(const PointCloud &cloud, const Aabb &region) {
    PointCloud out;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (!region.contains(cloud.points[i])) continue;
        out.points.push_back(cloud.points[i]);
        if (cloud.has_colors()) out.colors.push_back(cloud.colors[i]);
    }
    return out;
}

/// Points inside at least one of the boxes. An empty list keeps everything.
inline PointCloud crop_any(const PointCloud &cloud, std::span<const Aabb> regions) {
    if (regions.empty()) return cloud;
    PointCloud out;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        bool inside = false;
        for (const auto &r : regions) {
            if (r.contains(cloud.points[i])) {
                inside = true;
                break;
            }
        }
        if (!inside) continue;
        out.points.push_back(cloud.points[i]);
        if (cloud.has_colors()) out.colors.push_back(cloud.colors[i]);
    }
    return out;
}

}  // namespace twinmap
