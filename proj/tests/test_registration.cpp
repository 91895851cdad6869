#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "twinmap/registration.hpp"

using namespace twinmap;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double rotation_error_deg(const RigidTransform &a, const RigidTransform &b) {
    return compose(invert(a), b).angle() / kDeg;
}

void expect_proper_rotation(const Mat3 &r) {
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
}

}  // namespace

TEST(EstimateRigid, IdenticalListsGiveIdentity) {
    std::mt19937_64 rng(1);
    const auto pts = oracle::uniform_points(rng, 20, Vec3::Constant(-1), Vec3::Constant(1));
    const auto t = estimate_rigid(pts, pts);
    EXPECT_LT((t.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(t.translation().norm(), 1e-12);
}

TEST(EstimateRigid, PureTranslation) {
    std::mt19937_64 rng(2);
    const auto src = oracle::uniform_points(rng, 10, Vec3::Constant(-1), Vec3::Constant(1));
    std::vector<Vec3> dst;
    for (const auto &p : src) dst.push_back(p + Vec3(0, 0, 5));
    const auto t = estimate_rigid(src, dst);
    EXPECT_LT((t.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((t.translation() - Vec3(0, 0, 5)).norm(), 1e-9);
}

TEST(EstimateRigid, RecoversKnownTransform) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const RigidTransform truth(oracle::random_rotation(rng, std::numbers::pi), oracle::random_vector(rng, 20.0));
        const auto src = oracle::uniform_points(rng, 100, Vec3::Constant(-5), Vec3::Constant(5));
        std::vector<Vec3> dst;
        for (const auto &p : src) dst.push_back(truth.apply(p));
        const auto t = estimate_rigid(src, dst);
        expect_proper_rotation(t.rotation());
        EXPECT_LT((t.rotation() - truth.rotation()).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_LT((t.translation() - truth.translation()).norm(), 1e-6);
    }
}

TEST(EstimateRigid, CoplanarPointsAvoidReflection) {
    // Planar data admits a reflection with zero residual; det must stay +1.
    std::mt19937_64 rng(4);
    const RigidTransform truth(oracle::random_rotation(rng, 2.0), Vec3(1, 2, 3));
    std::vector<Vec3> src, dst;
    for (const auto &p : oracle::uniform_points(rng, 30, Vec3(-1, -1, 0), Vec3(1, 1, 0))) {
        src.push_back(p);
        dst.push_back(truth.apply(p));
    }
    const auto t = estimate_rigid(src, dst);
    expect_proper_rotation(t.rotation());
    EXPECT_LT((t.rotation() - truth.rotation()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(EstimateRigid, Errors) {
    const std::vector<Vec3> two{Vec3(0, 0, 0), Vec3(1, 0, 0)};
    EXPECT_THROW(estimate_rigid(two, two), InvalidArgument);
    const std::vector<Vec3> line{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)};
    EXPECT_THROW(estimate_rigid(line, line), InvalidArgument);
    const std::vector<Vec3> three{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    EXPECT_THROW(estimate_rigid(three, line), InvalidArgument);
}

TEST(EstimateRigid, AgreesWithSmallAngleGridSearch) {
    // Brute-force: scan XYZ Euler angles on a grid, optimal translation in
    // closed form (centroid difference), keep the lowest residual.
    std::mt19937_64 rng(5);
    constexpr double step = 0.005, span = 0.1;
    std::uniform_real_distribution<double> angle(-0.08, 0.08);
    for (int trial = 0; trial < 5; ++trial) {
        const Mat3 truth = (Eigen::AngleAxisd(angle(rng), Vec3::UnitZ()) * Eigen::AngleAxisd(angle(rng), Vec3::UnitY()) *
                            Eigen::AngleAxisd(angle(rng), Vec3::UnitX()))
                               .toRotationMatrix();
        const Vec3 shift = oracle::random_vector(rng, 3.0);
        const auto src = oracle::uniform_points(rng, 3, Vec3::Constant(-2), Vec3::Constant(2));
        std::vector<Vec3> dst;
        for (const auto &p : src) dst.push_back(truth * p + shift);

        const Vec3 cs = (src[0] + src[1] + src[2]) / 3.0;
        const Vec3 cd = (dst[0] + dst[1] + dst[2]) / 3.0;
        const auto cost = [&](const Mat3 &r) {
            const Vec3 t = cd - r * cs;
            double c = 0.0;
            for (int i = 0; i < 3; ++i) c += (r * src[i] + t - dst[i]).squaredNorm();
            return c;
        };
        double best = std::numeric_limits<double>::infinity();
        Mat3 best_r = Mat3::Identity();
        const int n = static_cast<int>(std::round(2 * span / step));
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j)
                for (int k = 0; k <= n; ++k) {
                    const Mat3 r = (Eigen::AngleAxisd(-span + i * step, Vec3::UnitZ()) *
                                    Eigen::AngleAxisd(-span + j * step, Vec3::UnitY()) *
                                    Eigen::AngleAxisd(-span + k * step, Vec3::UnitX()))
                                       .toRotationMatrix();
                    const double c = cost(r);
                    if (c < best) {
                        best = c;
                        best_r = r;
                    }
                }
        const auto est = estimate_rigid(src, dst);
        EXPECT_LE(cost(est.rotation()), best + 1e-12);
        const double gap = Eigen::AngleAxisd(est.rotation().transpose() * best_r).angle();
        EXPECT_LE(gap, std::sqrt(3.0) * step);
    }
}

TEST(Icp, IdenticalCloudsConvergeImmediately) {
    std::mt19937_64 rng(6);
    const PointCloud cloud(oracle::uniform_points(rng, 300, Vec3::Constant(-1), Vec3::Constant(1)));
    const auto r = icp(cloud, cloud);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations_run, 2u);
    EXPECT_EQ(r.final_rmse, 0.0);
    EXPECT_LT((r.transform.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(r.transform.translation().norm(), 1e-12);
    EXPECT_EQ(r.correspondence_count, cloud.size());
}

TEST(Icp, RecoversSyntheticTransform) {
    std::mt19937_64 rng(7);
    const PointCloud target(oracle::uniform_points(rng, 500, Vec3::Constant(-1), Vec3::Constant(1)));
    const RigidTransform motion(Eigen::AngleAxisd(10.0 * kDeg, Vec3::UnitZ()).toRotationMatrix(), Vec3(0.3, -0.2, 0.1));
    const PointCloud source = transform_cloud(target, motion);

    const auto r = icp(source, target);
    const RigidTransform expected = invert(motion);
    EXPECT_LT(rotation_error_deg(r.transform, expected), 0.5);
    EXPECT_LT((r.transform.translation() - expected.translation()).norm(), 0.02);
    expect_proper_rotation(r.transform.rotation());
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations_run, 1500u);

    for (std::size_t i = 1; i < r.history.size(); ++i) {
        EXPECT_LE(r.history[i].rmse, r.history[i - 1].rmse + 1e-9) << "iteration " << r.history[i].iteration;
    }

    // Restarting from the answer changes nothing on noiseless data.
    const auto again = icp(source, target, {}, r.transform);
    const RigidTransform increment = compose(again.transform, invert(r.transform));
    EXPECT_LT((increment.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(increment.translation().norm(), 1e-6);
}

TEST(Icp, UsesInitialGuess) {
    std::mt19937_64 rng(8);
    const PointCloud target(oracle::uniform_points(rng, 400, Vec3::Constant(-1), Vec3::Constant(1)));
    const auto motion = RigidTransform::translation_only(Vec3(50, 0, 0));
    const PointCloud source = transform_cloud(target, motion);
    EXPECT_THROW(icp(source, target), DivergenceError);
    const auto r = icp(source, target, {}, RigidTransform::translation_only(Vec3(-49.8, 0.1, 0)));
    EXPECT_LT((r.transform.translation() - Vec3(-50, 0, 0)).norm(), 1e-6);
}

TEST(Icp, FarDisplacementDiverges) {
    std::mt19937_64 rng(9);
    const PointCloud target(oracle::uniform_points(rng, 200, Vec3::Constant(-1), Vec3::Constant(1)));
    const PointCloud source = transform_cloud(target, RigidTransform::translation_only(Vec3(100, 0, 0)));
    try {
        icp(source, target);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError &e) {
        EXPECT_EQ(e.iteration(), 1u);
        EXPECT_NE(std::string(e.what()).find("alignment diverged"), std::string::npos);
    }
}

TEST(Icp, IterationCapReportsNotConverged) {
    std::mt19937_64 rng(10);
    const PointCloud target(oracle::uniform_points(rng, 300, Vec3::Constant(-1), Vec3::Constant(1)));
    const PointCloud source =
        transform_cloud(target, RigidTransform(Eigen::AngleAxisd(5 * kDeg, Vec3::UnitZ()).toRotationMatrix(), Vec3(0.2, 0, 0)));
    IcpConfig cfg;
    cfg.max_iterations = 1;
    const auto r = icp(source, target, cfg);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations_run, 1u);
    EXPECT_EQ(r.history.size(), 1u);
}

TEST(Icp, ConfigValidation) {
    const PointCloud c(std::vector<Vec3>{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)});
    IcpConfig bad;
    bad.search_radius = 0.0;
    EXPECT_THROW(icp(c, c, bad), InvalidArgument);
    bad = {};
    bad.max_iterations = 0;
    EXPECT_THROW(icp(c, c, bad), InvalidArgument);
    bad = {};
    bad.rmse_threshold = -1.0;
    EXPECT_THROW(icp(c, c, bad), InvalidArgument);
    EXPECT_THROW(icp(PointCloud{}, c), InvalidArgument);
}
