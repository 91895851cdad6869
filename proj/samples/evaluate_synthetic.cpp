// Library walkthrough: voxel model -> point cloud, ICP, correspondence
// statistics. Run from the repository root:
//
//   ./build/samples/evaluate_synthetic data/synthetic

#include <filesystem>
#include <iostream>

#include "twinmap/twinmap.hpp"

int main(int argc, char **argv) {
    using namespace twinmap;
    const std::filesystem::path dir = argc > 1 ? argv[1] : "data/synthetic";
    try {
        const VoxelGrid grid = parse_binvox(read_file_bytes(dir / "model.binvox"));
        const PointCloud model = voxel_to_points(surface_cells(grid), VoxelCoordinates::world);
        const PointCloud map = load_cloud(dir / "map.ply");

        const IcpResult aligned = icp(map, model);
        std::cout << "ICP: " << aligned.iterations_run << " iterations, rmse " << aligned.final_rmse << " m, "
                  << (aligned.converged ? "converged" : "hit the iteration cap") << "\n";

        const SpatialIndex index(model);
        const EvaluationReport report = evaluate_map(transform_cloud(map, aligned.transform), index);
        std::cout << format_report(report);
    } catch (const Error &e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
