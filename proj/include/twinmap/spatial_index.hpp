#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "twinmap/point_cloud.hpp"

namespace twinmap {

struct Neighbor {
    std::size_t index = 0;
    double distance = 0.0;  // meters
    double squared_distance = 0.0;
};

/// Static k-d tree over a point set.
///
/// Queries are exact: the returned nearest neighbor is the global minimum of
/// `squared_distance` over the indexed points, ties resolved to the lowest
/// point index. Subtrees are pruned only when the splitting-plane distance is
/// strictly larger than the current best, so equidistant candidates on the
/// far side are still visited. The index is immutable after construction and
/// concurrent const queries are safe.
class SpatialIndex {
public:
    static constexpr std::size_t kLeafSize = 12;

    explicit SpatialIndex(std::vector<Vec3> points) : points_(std::move(points)) {
        if (points_.empty()) throw InvalidArgument("cannot build a spatial index over an empty cloud");
        order_.resize(points_.size());
        std::iota(order_.begin(), order_.end(), std::uint32_t{0});
        nodes_.reserve(2 * points_.size() / kLeafSize + 1);
        build(0, static_cast<std::uint32_t>(order_.size()));
    }

    explicit SpatialIndex(const PointCloud &cloud) : SpatialIndex(cloud.points) {}

    std::size_t size() const { return points_.size(); }
    const std::vector<Vec3> &points() const { return points_; }

    Neighbor nearest(const Vec3 &query) const {
        Best best;
        search_nearest(0, query, best);
        return {best.index, std::sqrt(best.squared), best.squared};
    }

    /// All points with distance <= radius, sorted by point index.
    std::vector<Neighbor> radius_search(const Vec3 &query, double radius) const {
        std::vector<Neighbor> out;
        if (radius < 0.0) return out;
        search_radius(0, query, radius * radius, out);
        std::sort(out.begin(), out.end(),
                  [](const Neighbor &a, const Neighbor &b) { return a.index < b.index; });
        return out;
    }

private:
    struct Node {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t axis = -1;  // -1 marks a leaf
        double split = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
    };

    struct Best {
        std::size_t index = std::numeric_limits<std::size_t>::max();
        double squared = std::numeric_limits<double>::infinity();
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
        const auto id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({begin, end, -1, 0.0, 0, 0});
        if (end - begin <= kLeafSize) return id;

        Vec3 lo = points_[order_[begin]], hi = lo;
        for (std::uint32_t i = begin; i < end; ++i) {
            lo = lo.cwiseMin(points_[order_[i]]);
            hi = hi.cwiseMax(points_[order_[i]]);
        }
        Eigen::Index axis = 0;
        (hi - lo).maxCoeff(&axis);
        if (hi[axis] == lo[axis]) return id;  // all points coincide

        const std::uint32_t mid = begin + (end - begin) / 2;
        const auto less = [&](std::uint32_t a, std::uint32_t b) {
            const double ca = points_[a][axis], cb = points_[b][axis];
            return ca < cb || (ca == cb && a < b);
        };
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, less);
        // Read before recursing: the children reorder their own ranges.
        const double split = points_[order_[mid]][axis];

        const std::uint32_t left = build(begin, mid);
        const std::uint32_t right = build(mid, end);
        Node &node = nodes_[id];
        node.axis = static_cast<std::int32_t>(axis);
        node.split = split;
        node.left = left;
        node.right = right;
        return id;
    }

    void search_nearest(std::uint32_t id, const Vec3 &q, Best &best) const {
        const Node &node = nodes_[id];
        if (node.axis < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const std::uint32_t idx = order_[i];
                const double d2 = squared_distance(q, points_[idx]);
                if (d2 < best.squared || (d2 == best.squared && idx < best.index)) {
                    best.squared = d2;
                    best.index = idx;
                }
            }
            return;
        }
        // Left child holds coordinates <= split, right child >= split.
        const double diff = q[node.axis] - node.split;
        const std::uint32_t near = diff < 0.0 ? node.left : node.right;
        const std::uint32_t far = diff < 0.0 ? node.right : node.left;
        search_nearest(near, q, best);
        if (diff * diff <= best.squared) search_nearest(far, q, best);
    }

    void search_radius(std::uint32_t id, const Vec3 &q, double r2, std::vector<Neighbor> &out) const {
        const Node &node = nodes_[id];
        if (node.axis < 0) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const std::uint32_t idx = order_[i];
                const double d2 = squared_distance(q, points_[idx]);
                if (d2 <= r2) out.push_back({idx, std::sqrt(d2), d2});
            }
            return;
        }
        const double diff = q[node.axis] - node.split;
        const std::uint32_t near = diff < 0.0 ? node.left : node.right;
        const std::uint32_t far = diff < 0.0 ? node.right : node.left;
        search_radius(near, q, r2, out);
        if (diff * diff <= r2) search_radius(far, q, r2, out);
    }

    std::vector<Vec3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

inline SpatialIndex build_index(const PointCloud &cloud) { return SpatialIndex(cloud); }

inline Neighbor nearest(const SpatialIndex &index, const Vec3 &query) { return index.nearest(query); }

}  // namespace twinmap
