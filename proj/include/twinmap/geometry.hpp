#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "twinmap/error.hpp"

namespace twinmap {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Squared Euclidean distance, evaluated in a fixed order so that every
/// caller (index, oracle, evaluation) produces bit-identical results.
inline double squared_distance(const Vec3 &a, const Vec3 &b) {
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    const double dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
}

inline bool all_finite(const Vec3 &p) {
    return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

/// Proper rigid motion p -> R p + t (source frame to target frame).
class RigidTransform {
public:
    static constexpr double kTolerance = 1e-9;

    RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

    /// Throws InvalidArgument unless `rotation` is orthonormal with det +1
    /// within `tolerance` per entry.
    RigidTransform(const Mat3 &rotation, const Vec3 &translation, double tolerance = kTolerance)
        : rotation_(rotation), translation_(translation) {
        if (!is_rotation(rotation, tolerance) || !all_finite(translation)) {
            throw InvalidArgument("rotation matrix is not orthonormal with determinant +1");
        }
    }

    static RigidTransform identity() { return {}; }

    static RigidTransform translation_only(const Vec3 &t) { return {Mat3::Identity(), t}; }

    static RigidTransform from_quaternion(const Quat &q, const Vec3 &t) {
        return {q.normalized().toRotationMatrix(), t};
    }

    /// Row-major R followed by t. Rotations read from text are accepted
    /// within `tolerance` and then projected onto the nearest rotation.
    static RigidTransform from_row_major(std::span<const double, 12> values,
                                         double tolerance = 1e-6) {
        Mat3 r;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) r(i, j) = values[3 * i + j];
        }
        const Vec3 t(values[9], values[10], values[11]);
        if (!is_rotation(r, tolerance)) {
            throw InvalidArgument("rotation matrix is not orthonormal with determinant +1");
        }
        return {nearest_rotation(r), t};
    }

    std::array<double, 12> to_row_major() const {
        std::array<double, 12> out{};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) out[3 * i + j] = rotation_(i, j);
        }
        out[9] = translation_.x();
        out[10] = translation_.y();
        out[11] = translation_.z();
        return out;
    }

    const Mat3 &rotation() const { return rotation_; }
    const Vec3 &translation() const { return translation_; }

    Vec3 apply(const Vec3 &p) const { return rotation_ * p + translation_; }

    RigidTransform inverse() const {
        RigidTransform out;
        out.rotation_ = rotation_.transpose();
        out.translation_ = -(out.rotation_ * translation_);
        return out;
    }

    /// Rotation angle in radians.
    double angle() const {
        const double c = std::clamp((rotation_.trace() - 1.0) / 2.0, -1.0, 1.0);
        return std::acos(c);
    }

    static bool is_rotation(const Mat3 &r, double tolerance) {
        if (!r.allFinite()) return false;
        const Mat3 gram = r.transpose() * r - Mat3::Identity();
        return gram.cwiseAbs().maxCoeff() <= tolerance && std::abs(r.determinant() - 1.0) <= tolerance;
    }

    static Mat3 nearest_rotation(const Mat3 &m) {
        Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Mat3 d = Mat3::Identity();
        d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
        return svd.matrixU() * d * svd.matrixV().transpose();
    }

private:
    friend RigidTransform compose(const RigidTransform &a, const RigidTransform &b);

    Mat3 rotation_;
    Vec3 translation_;
};

/// a ∘ b: applies b first, then a.
inline RigidTransform compose(const RigidTransform &a, const RigidTransform &b) {
    RigidTransform out;
    out.rotation_ = a.rotation_ * b.rotation_;
    out.translation_ = a.rotation_ * b.translation_ + a.translation_;
    return out;
}

inline RigidTransform invert(const RigidTransform &t) { return t.inverse(); }

/// Closed axis-aligned box.
struct Aabb {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();

    Aabb() = default;
    Aabb(const Vec3 &lo, const Vec3 &hi) : min(lo), max(hi) {
        if (!all_finite(lo) || !all_finite(hi) || (lo.array() > hi.array()).any()) {
            throw InvalidArgument("box min must not exceed max on any axis");
        }
    }

    bool contains(const Vec3 &p) const {
        return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y() &&
               p.z() >= min.z() && p.z() <= max.z();
    }

    bool overlaps(const Aabb &o) const {
        return (min.array() <= o.max.array()).all() && (o.min.array() <= max.array()).all();
    }

    Vec3 center() const { return 0.5 * (min + max); }
    Vec3 extent() const { return max - min; }

    Aabb merged(const Aabb &o) const { return {min.cwiseMin(o.min), max.cwiseMax(o.max)}; }
};

}  // namespace twinmap
