#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "twinmap/point_cloud.hpp"
#include "twinmap/spatial_index.hpp"

namespace twinmap {

/// Point-to-point ICP settings. Defaults are the evaluation configuration:
/// 1 m search radius, 1e-5 relative RMSE change, 1500 iterations.
struct IcpConfig {
    double search_radius = 1.0;     // meters; also the correspondence rejection distance
    double rmse_threshold = 1e-5;   // relative change between consecutive iterations
    std::size_t max_iterations = 1500;
    std::size_t min_correspondences = 10;

    void validate() const {
        if (!(search_radius > 0.0) || !std::isfinite(search_radius)) throw InvalidArgument("search_radius must be > 0");
        if (!(rmse_threshold >= 0.0)) throw InvalidArgument("rmse_threshold must be >= 0");
        if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    }
};

struct IcpIteration {
    std::size_t iteration = 0;  // 1-based
    double rmse = 0.0;          // over the accepted pairs, after this iteration's refit
    std::size_t correspondences = 0;
};

struct IcpResult {
    RigidTransform transform;  // source -> target, including the initial guess
    double final_rmse = 0.0;
    std::size_t iterations_run = 0;
    bool converged = false;
    std::size_t correspondence_count = 0;
    std::vector<IcpIteration> history;
};

/// Least-squares rigid fit of R s_i + t onto t_i (Kabsch/Umeyama without
/// scale). The reflection case is folded back so det(R) = +1.
inline RigidTransform estimate_rigid(std::span<const Vec3> source, std::span<const Vec3> target) {
    if (source.size() != target.size()) throw InvalidArgument("estimate_rigid: point lists differ in length");
    if (source.size() < 3) throw InvalidArgument("estimate_rigid: at least 3 point pairs are required");

    const double n = static_cast<double>(source.size());
    Vec3 mu_s = Vec3::Zero(), mu_t = Vec3::Zero();
    for (std::size_t i = 0; i < source.size(); ++i) {
        mu_s += source[i];
        mu_t += target[i];
    }
    mu_s /= n;
    mu_t /= n;

    Mat3 cross = Mat3::Zero();
    Mat3 spread = Mat3::Zero();
    for (std::size_t i = 0; i < source.size(); ++i) {
        const Vec3 ds = source[i] - mu_s;
        cross += ds * (target[i] - mu_t).transpose();
        spread += ds * ds.transpose();
    }

    // Collinear (or coincident) source points leave the rotation about their
    // common line undetermined.
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(spread, Eigen::EigenvaluesOnly);
    const Vec3 lambda = eig.eigenvalues();  // ascending
    if (!(lambda[2] > 0.0) || lambda[1] <= 1e-12 * lambda[2]) {
        throw InvalidArgument("estimate_rigid: degenerate (collinear) point configuration");
    }

    Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat3 &u = svd.matrixU();
    const Mat3 &v = svd.matrixV();
    Mat3 d = Mat3::Identity();
    if ((v * u.transpose()).determinant() < 0.0) d(2, 2) = -1.0;
    const Mat3 rotation = RigidTransform::nearest_rotation(v * d * u.transpose());
    return {rotation, mu_t - rotation * mu_s};
}

/// Aligns `source` onto `target` starting from `init`.
///
/// Each iteration pairs every transformed source point with its nearest
/// target point, drops pairs farther than `search_radius`, refits the
/// increment by least squares and composes it onto the running estimate.
/// Iteration stops when |rmse_prev - rmse| / max(rmse_prev, eps) falls below
/// `rmse_threshold` or when `max_iterations` is reached. Throws
/// DivergenceError when fewer than `min_correspondences` pairs survive.
inline IcpResult icp(const PointCloud &source, const PointCloud &target, const IcpConfig &config = {},
                     const RigidTransform &init = RigidTransform::identity()) {
    config.validate();
    if (source.empty() || target.empty()) throw InvalidArgument("icp: source and target clouds must be non-empty");

    constexpr double kEps = 1e-12;
    const SpatialIndex index(target);
    const std::size_t min_pairs = std::max<std::size_t>(config.min_correspondences, 3);

    IcpResult result;
    result.transform = init;
    std::vector<Vec3> moved(source.size());
    std::vector<Vec3> matched_src, matched_tgt;
    matched_src.reserve(source.size());
    matched_tgt.reserve(source.size());
    double previous_rmse = 0.0;

    for (std::size_t it = 1; it <= config.max_iterations; ++it) {
        for (std::size_t i = 0; i < source.size(); ++i) moved[i] = result.transform.apply(source.points[i]);

        matched_src.clear();
        matched_tgt.clear();
        for (const auto &p : moved) {
            const Neighbor nn = index.nearest(p);
            if (nn.distance > config.search_radius) continue;
            matched_src.push_back(p);
            matched_tgt.push_back(index.points()[nn.index]);
        }
        if (matched_src.size() < min_pairs) throw DivergenceError(it, matched_src.size());

        const RigidTransform step = estimate_rigid(matched_src, matched_tgt);
        result.transform = compose(step, result.transform);

        double sum_sq = 0.0;
        for (std::size_t i = 0; i < matched_src.size(); ++i) {
            sum_sq += squared_distance(step.apply(matched_src[i]), matched_tgt[i]);
        }
        const double rmse = std::sqrt(sum_sq / static_cast<double>(matched_src.size()));

        result.history.push_back({it, rmse, matched_src.size()});
        result.iterations_run = it;
        result.final_rmse = rmse;
        result.correspondence_count = matched_src.size();

        if (it > 1) {
            const double change = std::abs(previous_rmse - rmse) / std::max(previous_rmse, kEps);
            if (change < config.rmse_threshold) {
                result.converged = true;
                break;
            }
        }
        previous_rmse = rmse;
    }
    return result;
}

}  // namespace twinmap
