// Writes the small synthetic campus used by the end-to-end pipeline test:
// a voxel ground-truth model, a noisy displaced "SLAM" map, a flight
// trajectory in the map frame, a pipeline config and a coverage scene.
//
//   make_synthetic_dataset <output-dir>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <random>

#include "twinmap/twinmap.hpp"

namespace fs = std::filesystem;
using namespace twinmap;

namespace {

VoxelGrid campus() {
    // 64 x 64 x 16 cells of 1 m: ground slab, two buildings, a raised field.
    VoxelGrid grid({64, 64, 16}, Vec3::Zero(), 64.0);
    const auto fill = [&](std::size_t x0, std::size_t x1, std::size_t y0, std::size_t y1, std::size_t z0,
                          std::size_t z1) {
        for (std::size_t x = x0; x < x1; ++x)
            for (std::size_t y = y0; y < y1; ++y)
                for (std::size_t z = z0; z < z1; ++z) grid.set(x, y, z, true);
    };
    fill(0, 64, 0, 64, 0, 1);
    fill(10, 26, 10, 31, 1, 13);
    fill(40, 56, 36, 51, 1, 9);
    fill(36, 60, 4, 22, 1, 2);
    return grid;
}

}  // namespace

int main(int argc, char **argv) {
    if (argc != 2) {
        std::cerr << "usage: make_synthetic_dataset <output-dir>\n";
        return 2;
    }
    const fs::path dir = argv[1];
    fs::create_directories(dir);
    std::mt19937_64 rng(20241016);
    std::normal_distribution<double> noise(0.0, 0.05);

    const VoxelGrid grid = campus();
    write_file(dir / "model.binvox", write_binvox(grid));

    // Ground truth -> map frame: small yaw about the campus center plus an offset.
    const Vec3 center(32.0, 32.0, 0.0);
    const Mat3 yaw = Eigen::AngleAxisd(0.5 * std::numbers::pi / 180.0, Vec3::UnitZ()).toRotationMatrix();
    const RigidTransform map_to_model(yaw, center - yaw * center + Vec3(0.3, -0.2, 0.1));
    const RigidTransform model_to_map = map_to_model.inverse();

    const PointCloud surface = voxel_to_points(surface_cells(grid), VoxelCoordinates::world);
    PointCloud map;
    for (std::size_t i = 0; i < surface.size(); i += 3) {
        const Vec3 noisy = surface.points[i] + Vec3(noise(rng), noise(rng), noise(rng));
        map.points.push_back(model_to_map.apply(noisy));
    }
    save_cloud(map, dir / "map.ply");

    // Lawnmower flight at 30 m, expressed in the map frame.
    Trajectory traj;
    double t = 0.0;
    for (int leg = 0; leg < 5; ++leg) {
        for (int step = 0; step < 10; ++step) {
            const double x = leg % 2 == 0 ? 4.0 + 6.0 * step : 58.0 - 6.0 * step;
            const double y = 6.0 + 13.0 * leg;
            const double heading = leg % 2 == 0 ? 0.0 : std::numbers::pi;
            const Quat q(Eigen::AngleAxisd(heading, Vec3::UnitZ()));
            const Vec3 p = model_to_map.apply(Vec3(x, y, 30.0));
            traj.poses.push_back({t, p, Quat(model_to_map.rotation()) * q});
            t += 1.0;
        }
    }
    write_file(dir / "trajectory.txt", format_trajectory(traj));

    write_file(dir / "pipeline.cfg",
               "# ICP and evaluation settings\n"
               "search_radius = 1\n"
               "rmse_threshold = 0.00001\n"
               "max_iterations = 1500\n"
               "threshold = 1\n"
               "bin_width = 0.05\n"
               "# building corner and field corner\n"
               "crop = 4 4 -2 32 36 16\n"
               "crop = 34 2 -2 62 24 4\n");

    // Top-down cine close to the vehicle, forward-looking wide sensor.
    const double h = 155.0, aspect = 2688.0 / 1512.0;
    const Quat pitch(Eigen::AngleAxisd(10.0 * std::numbers::pi / 180.0, Vec3::UnitY()));
    const Quat down = CameraPose::top_down();
    Scene scene;
    scene.bounds = Aabb(Vec3(-500, -500, 0), Vec3(500, 500, 20));
    scene.tile_size = 50.0;
    scene.cameras.push_back({CameraRole::cine, {Vec3(0, 0, 60), down}, {90.0, 1.0, 0.5, 2000.0}});
    scene.cameras.push_back({CameraRole::sensor, {Vec3(0, 0, 30), pitch}, {h, aspect, 0.5, 400.0}});
    write_file(dir / "scene.txt", format_scene(scene));

    std::cout << "wrote synthetic dataset to " << dir.string() << " (" << map.size() << " map points)\n";
    return 0;
}
