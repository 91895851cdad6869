#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "oracles.hpp"

using namespace twinmap;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("twinmap_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string &name) const { return (dir_ / name).string(); }

    int run(std::vector<std::string> args) {
        args.insert(args.begin(), "twinmap");
        std::vector<const char *> argv;
        for (const auto &a : args) argv.push_back(a.c_str());
        out_.str({});
        err_.str({});
        return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    void write_grid(const std::string &name, std::size_t n, bool solid) {
        std::vector<std::uint8_t> occ(n * n * n, solid ? 1 : 0);
        if (!solid) occ[0] = 1;
        write_file(dir_ / name, write_binvox(VoxelGrid({n, n, n}, occ, Vec3::Zero(), static_cast<double>(n))));
    }

    std::string read(const std::string &name) const { return read_file_text(dir_ / name); }

    fs::path dir_;
    std::ostringstream out_, err_;
};

PointCloud sheet(double spacing, int n, double z = 0.0) {
    PointCloud c;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c.points.emplace_back(i * spacing, j * spacing, z);
    return c;
}

}  // namespace

TEST_F(Cli, Voxel2CloudCounts) {
    write_grid("one.binvox", 1, true);
    EXPECT_EQ(run({"voxel2cloud", path("one.binvox"), path("one.ply")}), cli::kOk) << err_.str();
    EXPECT_EQ(load_cloud(dir_ / "one.ply").size(), 1u);

    write_grid("solid.binvox", 3, true);
    EXPECT_EQ(run({"voxel2cloud", path("solid.binvox"), path("all.ply")}), cli::kOk);
    EXPECT_EQ(load_cloud(dir_ / "all.ply").size(), 27u);
    EXPECT_EQ(run({"voxel2cloud", path("solid.binvox"), path("surface.xyz"), "--surface-only"}), cli::kOk);
    const auto surface = load_cloud(dir_ / "surface.xyz");
    EXPECT_EQ(surface.size(), 26u);
    for (const auto &p : surface.points) EXPECT_NE(p, Vec3(1.5, 1.5, 1.5));

    EXPECT_EQ(run({"voxel2cloud", path("solid.binvox"), path("norm.ply"), "--mode", "normalized", "--ply-encoding",
                   "ascii"}),
              cli::kOk);
    EXPECT_EQ(load_cloud(dir_ / "norm.ply").bounds().max, Vec3::Constant(2.5 / 3.0));
}

TEST_F(Cli, Voxel2CloudErrors) {
    EXPECT_EQ(run({"voxel2cloud", path("absent.binvox"), path("x.ply")}), cli::kUsage);
    write_file(dir_ / "bad.binvox", std::string("#binvox 2\n"));
    EXPECT_EQ(run({"voxel2cloud", path("bad.binvox"), path("x.ply")}), cli::kInputError);
    write_grid("g.binvox", 2, true);
    EXPECT_EQ(run({"voxel2cloud", path("g.binvox"), path("g.binvox")}), cli::kUsage);
    EXPECT_EQ(run({"voxel2cloud", path("g.binvox")}), cli::kUsage);
    EXPECT_EQ(run({"frobnicate"}), cli::kUsage);
    EXPECT_EQ(run({}), cli::kUsage);
}

TEST_F(Cli, RegisterIdenticalGivesIdentity) {
    std::mt19937_64 rng(1);
    save_cloud(PointCloud(oracle::uniform_points(rng, 300, Vec3::Zero(), Vec3::Constant(2))), dir_ / "a.ply");
    EXPECT_EQ(run({"register", path("a.ply"), path("a.ply"), "-o", path("t.txt"), "--log", path("log.csv")}), cli::kOk)
        << err_.str();
    const auto t = parse_transform(read("t.txt"));
    EXPECT_LT((t.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(t.translation().norm(), 1e-12);
    EXPECT_EQ(read("log.csv").rfind("iteration,rmse_m,correspondences\n1,0,300\n", 0), 0u);
}

TEST_F(Cli, RegisterRecoversSyntheticTransform) {
    std::mt19937_64 rng(2);
    const PointCloud target(oracle::uniform_points(rng, 500, Vec3::Constant(-1), Vec3::Constant(1)));
    const RigidTransform motion(Eigen::AngleAxisd(10 * std::numbers::pi / 180, Vec3::UnitZ()).toRotationMatrix(),
                                Vec3(0.3, -0.2, 0.1));
    save_cloud(target, dir_ / "target.ply");
    save_cloud(transform_cloud(target, motion), dir_ / "source.ply");
    write_file(dir_ / "icp.cfg", std::string("search_radius = 1\nrmse_threshold = 0.00001\nmax_iterations = 1500\n"));
    EXPECT_EQ(run({"register", path("source.ply"), path("target.ply"), "-o", path("t.txt"), "--config", path("icp.cfg")}),
              cli::kOk)
        << err_.str();
    const auto t = parse_transform(read("t.txt"));
    const auto residual = compose(t, motion);
    EXPECT_LT(residual.angle() * 180 / std::numbers::pi, 0.5);
    EXPECT_LT(residual.translation().norm(), 0.02);
    EXPECT_NE(out_.str().find("converged = true"), std::string::npos);
}

TEST_F(Cli, RegisterDisjointCloudsDiverge) {
    std::mt19937_64 rng(3);
    save_cloud(PointCloud(oracle::uniform_points(rng, 100, Vec3::Zero(), Vec3::Ones())), dir_ / "a.ply");
    save_cloud(PointCloud(oracle::uniform_points(rng, 100, Vec3::Constant(50), Vec3::Constant(51))), dir_ / "b.ply");
    EXPECT_EQ(run({"register", path("a.ply"), path("b.ply"), "-o", path("t.txt")}), cli::kDiverged);
    EXPECT_NE(err_.str().find("alignment diverged"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir_ / "t.txt"));
}

TEST_F(Cli, RegisterCropsAndConfigErrors) {
    std::mt19937_64 rng(4);
    save_cloud(PointCloud(oracle::uniform_points(rng, 200, Vec3::Zero(), Vec3::Constant(2))), dir_ / "a.ply");
    EXPECT_EQ(run({"register", path("a.ply"), path("a.ply"), "-o", path("t.txt"), "--crop", "0 0 0 1 1 1"}), cli::kOk)
        << err_.str();
    EXPECT_NE(out_.str().find("registering"), std::string::npos);
    EXPECT_EQ(run({"register", path("a.ply"), path("a.ply"), "-o", path("t.txt"), "--crop", "10 10 10 11 11 11"}),
              cli::kInputError);
    write_file(dir_ / "bad.cfg", std::string("radius = 1\n"));
    EXPECT_EQ(run({"register", path("a.ply"), path("a.ply"), "-o", path("t.txt"), "--config", path("bad.cfg")}),
              cli::kUsage);
    EXPECT_EQ(run({"register", path("a.ply"), path("a.ply"), "-o", path("t.txt"), "--search-radius", "-1"}),
              cli::kInputError);
}

TEST_F(Cli, EvaluateIdentityAndOffsetSheet) {
    const auto model = sheet(0.1, 40);
    save_cloud(model, dir_ / "model.ply");
    write_file(dir_ / "id.txt", format_transform(RigidTransform::identity()));
    EXPECT_EQ(run({"evaluate", path("model.ply"), path("model.ply"), "-t", path("id.txt"), "-o", path("self.txt")}),
              cli::kOk)
        << err_.str();
    auto r = parse_report(read("self.txt"));
    EXPECT_EQ(r.mean_error, 0.0);
    EXPECT_EQ(r.std_dev, 0.0);
    EXPECT_EQ(r.correspondence_count, model.size());
    EXPECT_TRUE(fs::exists(dir_ / "self_histogram.csv"));

    // Offset map: every point sits 0.5 m straight above the sheet.
    save_cloud(sheet(0.1, 40, 0.5), dir_ / "map.ply");
    EXPECT_EQ(run({"evaluate", path("map.ply"), path("model.ply"), "-t", path("id.txt"), "-o", path("off.txt"),
                   "--histogram-csv", path("off.csv"), "--aligned-map", path("aligned.xyz")}),
              cli::kOk);
    r = parse_report(read("off.txt"));
    const auto want = oracle::all_pairs_correspondences(sheet(0.1, 40, 0.5).points, model.points, 1.0);
    double sum = 0.0;
    for (const auto &p : want) sum += p.distance;
    EXPECT_EQ(r.correspondence_count, want.size());
    EXPECT_NEAR(r.mean_error, sum / static_cast<double>(want.size()), 1e-12);
    EXPECT_NEAR(r.mean_error, 0.5, 1e-12);
    EXPECT_EQ(read("off.csv").substr(0, 30), "bin_lower_m,bin_upper_m,count\n");
    EXPECT_EQ(load_cloud(dir_ / "aligned.xyz").size(), model.size());
}

TEST_F(Cli, EvaluateErrors) {
    save_cloud(sheet(1.0, 3), dir_ / "model.ply");
    save_cloud(sheet(1.0, 3, 5.0), dir_ / "far.ply");
    EXPECT_EQ(run({"evaluate", path("model.ply"), path("model.ply"), "-t", path("none.txt"), "-o", path("r.txt")}),
              cli::kUsage);
    EXPECT_NE(err_.str().find("transform file"), std::string::npos);
    write_file(dir_ / "id.txt", format_transform(RigidTransform::identity()));
    EXPECT_EQ(run({"evaluate", path("far.ply"), path("model.ply"), "-t", path("id.txt"), "-o", path("r.txt")}),
              cli::kEmptyEvaluation);
    EXPECT_EQ(parse_report(read("r.txt")).correspondence_count, 0u);
    EXPECT_EQ(run({"evaluate", path("far.ply"), path("model.ply"), "-t", path("id.txt"), "-o", path("r.txt"),
                   "--threshold", "0"}),
              cli::kUsage);
    EXPECT_EQ(run({"evaluate", path("model.ply"), path("model.ply"), "-t", path("id.txt"), "-o", path("model.ply")}),
              cli::kUsage);
}

TEST_F(Cli, EvaluateBinvoxModelSelfMatch) {
    write_grid("solid.binvox", 4, true);
    EXPECT_EQ(run({"voxel2cloud", path("solid.binvox"), path("cells.ply")}), cli::kOk);
    write_file(dir_ / "id.txt", format_transform(RigidTransform::identity()));
    EXPECT_EQ(run({"evaluate", path("cells.ply"), path("solid.binvox"), "-t", path("id.txt"), "-o", path("r.txt")}),
              cli::kOk);
    EXPECT_EQ(parse_report(read("r.txt")).mean_error, 0.0);
}

TEST_F(Cli, CoverageAndPlacement) {
    const std::string same =
        "bounds 0 0 0 300 300 30\ntile_size 100\n"
        "camera cine 150 150 15 0 0 0 1 90 1 0.5 200\ncamera sensor 150 150 15 0 0 0 1 90 1 0.5 200\n";
    write_file(dir_ / "same.txt", same);
    EXPECT_EQ(run({"coverage", path("same.txt")}), cli::kOk) << err_.str();
    EXPECT_NE(out_.str().find("covered = true"), std::string::npos);

    const std::string horizon =
        "bounds -500 -1000 0 500 1000 20\ntile_size 50\n"
        "camera cine 0 0 60 0 0.7071067811865476 0 0.7071067811865476 90 1 0.5 100\n"
        "camera sensor 0 0 30 0 0.08715574274765817 0 0.9961946980917455 155 1.7777777777777777 0.5 400\n";
    write_file(dir_ / "horizon.txt", horizon);
    EXPECT_EQ(run({"coverage", path("horizon.txt"), "-o", path("cov.txt"), "--missing-csv", path("missing.csv")}),
              cli::kUncovered);
    EXPECT_NE(read("cov.txt").find("covered = false"), std::string::npos);
    const std::string missing = read("missing.csv");
    EXPECT_GT(std::count(missing.begin(), missing.end(), '\n'), 1);

    // Short far plane cannot reach; a long one can.
    EXPECT_EQ(run({"place", path("horizon.txt")}), cli::kUnplaceable);
    EXPECT_NE(err_.str().find("region exceeds cine-camera range"), std::string::npos);
    std::string wide = horizon;
    wide.replace(wide.find("90 1 0.5 100"), 12, "90 1 0.5 5000");
    write_file(dir_ / "wide.txt", wide);
    EXPECT_EQ(run({"place", path("wide.txt"), "-o", path("place.txt"), "--scene-out", path("placed.txt")}), cli::kOk)
        << err_.str();
    EXPECT_NE(read("place.txt").find("covered = true"), std::string::npos);
    EXPECT_EQ(run({"coverage", path("placed.txt")}), cli::kOk);

    write_file(dir_ / "broken.txt", std::string("bounds 0 0 0 1 1\n"));
    EXPECT_EQ(run({"coverage", path("broken.txt")}), cli::kInputError);
    EXPECT_NE(err_.str().find("line 1"), std::string::npos);
}

TEST_F(Cli, TrajectoryReframing) {
    write_file(dir_ / "traj.txt", std::string("0 1 2 3 0 0 0 1\n1 4 5 6 0 0 0.6 0.8\n"));
    write_file(dir_ / "id.txt", format_transform(RigidTransform::identity()));
    EXPECT_EQ(run({"traj", path("traj.txt"), "-t", path("id.txt"), "-o", path("out.csv")}), cli::kOk);
    const std::string csv = read("out.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n', 30) + 1), "timestamp,x,y,z,qx,qy,qz,qw\n0,1,2,3,0,0,0,1\n");

    const auto shift = RigidTransform::translation_only(Vec3(10, 0, -1));
    write_file(dir_ / "shift.txt", format_transform(shift));
    write_file(dir_ / "back.txt", format_transform(invert(shift)));
    EXPECT_EQ(run({"traj", path("traj.txt"), "-t", path("shift.txt"), "-o", path("moved.txt")}), cli::kOk);
    EXPECT_EQ(parse_trajectory(read("moved.txt")).poses[0].position, Vec3(11, 2, 2));
    EXPECT_EQ(run({"traj", path("moved.txt"), "-t", path("back.txt"), "-o", path("round.txt")}), cli::kOk);
    const auto original = parse_trajectory(read("traj.txt"));
    const auto round = parse_trajectory(read("round.txt"));
    ASSERT_EQ(round.size(), original.size());
    for (std::size_t i = 0; i < round.size(); ++i) {
        EXPECT_LT((round.poses[i].position - original.poses[i].position).norm(), 1e-9);
        EXPECT_LT((round.poses[i].orientation.coeffs() - original.poses[i].orientation.coeffs()).norm(), 1e-9);
    }

    write_file(dir_ / "bad.txt", std::string("0 1 2 3 0 0 0 1\n1 2 3\n"));
    EXPECT_EQ(run({"traj", path("bad.txt"), "-t", path("id.txt"), "-o", path("x.csv")}), cli::kInputError);
    EXPECT_NE(err_.str().find("line 2"), std::string::npos);
}

TEST_F(Cli, CompareReports) {
    EvaluationReport a, b;
    a.map_point_count = 84029;
    a.correspondence_count = 36178;
    a.mean_error = 0.5548;
    a.std_dev = 0.1885;
    b.map_point_count = 71918;
    b.correspondence_count = 27820;
    b.mean_error = 0.5733;
    b.std_dev = 0.1998;
    write_file(dir_ / "a.txt", format_report(a));
    write_file(dir_ / "b.txt", format_report(b));
    EXPECT_EQ(run({"compare", path("a.txt"), path("b.txt"), "-o", path("cmp.txt")}), cli::kOk);
    const auto text = read("cmp.txt");
    EXPECT_NE(text.find("mean_delta_m = 0.0185\n"), std::string::npos);
    EXPECT_NE(text.find("map_points_diff_pct_of_larger = 14.4\n"), std::string::npos);
}

TEST_F(Cli, DeterministicOutputs) {
    std::mt19937_64 rng(5);
    const PointCloud target(oracle::uniform_points(rng, 300, Vec3::Zero(), Vec3::Constant(2)));
    save_cloud(target, dir_ / "target.ply");
    save_cloud(transform_cloud(target, RigidTransform::translation_only(Vec3(0.1, 0, 0))), dir_ / "source.ply");
    for (const char *tag : {"1", "2"}) {
        const std::string s(tag);
        ASSERT_EQ(run({"register", path("source.ply"), path("target.ply"), "-o", path("t" + s + ".txt"), "--log",
                       path("log" + s + ".csv")}),
                  cli::kOk);
        ASSERT_EQ(run({"evaluate", path("source.ply"), path("target.ply"), "-t", path("t" + s + ".txt"), "-o",
                       path("r" + s + ".txt")}),
                  cli::kOk);
    }
    EXPECT_EQ(read("t1.txt"), read("t2.txt"));
    EXPECT_EQ(read("log1.csv"), read("log2.csv"));
    EXPECT_EQ(read("r1.txt"), read("r2.txt"));
    EXPECT_EQ(read("r1_histogram.csv"), read("r2_histogram.csv"));
}
