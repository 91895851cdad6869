#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "twinmap/twinmap.hpp"

namespace twinmap::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kInputError = 3,
    kDiverged = 4,
    kUncovered = 5,
    kUnplaceable = 6,
    kEmptyEvaluation = 7,
};

class UsageError : public Error {
public:
    using Error::Error;
};

struct Voxel2CloudOptions {
    fs::path input;
    fs::path output;
    VoxelCoordinates mode = VoxelCoordinates::world;
    bool surface_only = false;
    PlyWriteOptions ply;
};

struct RegisterOptions {
    fs::path source;
    fs::path target;
    fs::path transform_out;
    std::optional<fs::path> log_out;  // per-iteration RMSE CSV
    IcpConfig icp;
    RigidTransform init;
    std::vector<Aabb> crops;  // applied to both clouds before ICP
};

struct EvaluateOptions {
    fs::path map;
    fs::path model;  // point cloud, or .binvox converted in world coordinates
    fs::path transform;
    fs::path report_out;
    std::optional<fs::path> histogram_csv;  // default: <report stem>_histogram.csv
    std::optional<fs::path> aligned_map_out;
    double threshold = 1.0;
    double bin_width = 0.05;
};

struct CoverageOptions {
    fs::path scene;
    std::optional<fs::path> report_out;
    std::optional<fs::path> missing_csv;
};

struct PlaceOptions {
    fs::path scene;
    std::optional<fs::path> report_out;
    std::optional<fs::path> scene_out;  // input scene with the cine camera replaced
};

struct TrajOptions {
    fs::path trajectory;
    fs::path transform;
    fs::path output;  // CSV, or TUM text when the extension is .txt/.tum
};

struct CompareOptions {
    fs::path report_a;
    fs::path report_b;
    std::optional<fs::path> output;
};

/// Applies "key = value" entries onto register/evaluate settings. Recognized
/// keys: search_radius, rmse_threshold, max_iterations, min_correspondences,
/// init (12 numbers), crop (6 numbers, repeatable), threshold, bin_width.
void apply_config(const KeyValueConfig &cfg, RegisterOptions &opts);
void apply_config(const KeyValueConfig &cfg, EvaluateOptions &opts);

int run_voxel2cloud(const Voxel2CloudOptions &opts, std::ostream &out, std::ostream &err);
int run_register(const RegisterOptions &opts, std::ostream &out, std::ostream &err);
int run_evaluate(const EvaluateOptions &opts, std::ostream &out, std::ostream &err);
int run_coverage(const CoverageOptions &opts, std::ostream &out, std::ostream &err);
int run_place(const PlaceOptions &opts, std::ostream &out, std::ostream &err);
int run_traj(const TrajOptions &opts, std::ostream &out, std::ostream &err);
int run_compare(const CompareOptions &opts, std::ostream &out, std::ostream &err);

/// Full command-line entry point (argv[0] is the program name).
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace twinmap::cli
