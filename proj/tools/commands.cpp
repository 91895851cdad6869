#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <ostream>

namespace twinmap::cli {
namespace {

template <typename Fn>
int guarded(std::ostream &err, Fn &&fn) {
    try {
        return fn();
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const DivergenceError &e) {
        err << "error: " << e.what() << "\n";
        return kDiverged;
    } catch (const PlacementError &e) {
        err << "error: " << e.what() << "\n";
        return kUnplaceable;
    } catch (const ParseError &e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const InvalidArgument &e) {
        err << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

fs::path normalized(const fs::path &p) {
    std::error_code ec;
    auto out = fs::weakly_canonical(p, ec);
    return ec ? p.lexically_normal() : out;
}

void require_distinct(const std::vector<fs::path> &inputs, const std::vector<fs::path> &outputs) {
    for (const auto &o : outputs) {
        for (const auto &i : inputs) {
            if (normalized(o) == normalized(i)) {
                throw UsageError("output path '" + o.string() + "' must differ from input '" + i.string() + "'");
            }
        }
    }
}

void require_file(const fs::path &p, std::string_view what) {
    if (p.empty()) throw UsageError(std::string(what) + " path is required");
    if (!fs::exists(p)) throw UsageError(std::string(what) + " '" + p.string() + "' does not exist");
}

std::string lower_extension(const fs::path &p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

PointCloud load_cloud_or_voxels(const fs::path &p) {
    if (lower_extension(p) == ".binvox") {
        return voxel_to_points(parse_binvox(read_file_bytes(p)), VoxelCoordinates::world);
    }
    return load_cloud(p);
}

fs::path sibling_with_suffix(const fs::path &p, std::string_view suffix) {
    return p.parent_path() / (p.stem().string() + std::string(suffix));
}

}  // namespace

void apply_config(const KeyValueConfig &cfg, RegisterOptions &opts) {
    static const std::vector<std::string> known = {"search_radius", "rmse_threshold", "max_iterations",
                                                   "min_correspondences", "init", "crop", "threshold", "bin_width"};
    for (const auto &k : cfg.keys()) {
        if (std::find(known.begin(), known.end(), k) == known.end()) throw UsageError("unknown config key '" + k + "'");
    }
    if (auto v = cfg.get_double("search_radius")) opts.icp.search_radius = *v;
    if (auto v = cfg.get_double("rmse_threshold")) opts.icp.rmse_threshold = *v;
    if (auto v = cfg.get_count("max_iterations")) opts.icp.max_iterations = *v;
    if (auto v = cfg.get_count("min_correspondences")) opts.icp.min_correspondences = *v;
    if (auto v = cfg.get("init")) opts.init = parse_transform(*v);
    const auto crops = cfg.get_all("crop");
    if (!crops.empty()) {
        opts.crops.clear();
        for (const auto &c : crops) opts.crops.push_back(parse_box(c));
    }
}

void apply_config(const KeyValueConfig &cfg, EvaluateOptions &opts) {
    RegisterOptions scratch;
    apply_config(cfg, scratch);  // validates keys shared by the pipeline config
    if (auto v = cfg.get_double("threshold")) opts.threshold = *v;
    if (auto v = cfg.get_double("bin_width")) opts.bin_width = *v;
}

int run_voxel2cloud(const Voxel2CloudOptions &opts, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        require_file(opts.input, "voxel grid");
        require_distinct({opts.input}, {opts.output});
        VoxelGrid grid = parse_binvox(read_file_bytes(opts.input));
        if (opts.surface_only) grid = surface_cells(grid);
        const PointCloud cloud = voxel_to_points(grid, opts.mode);
        save_cloud(cloud, opts.output, opts.ply);
        const auto &d = grid.dims();
        out << "voxel grid " << d[0] << "x" << d[1] << "x" << d[2] << ", " << cloud.size() << " points -> "
            << opts.output.string() << "\n";
        return kOk;
    });
}

int run_register(const RegisterOptions &opts, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        require_file(opts.source, "source cloud");
        require_file(opts.target, "target cloud");
        if (opts.transform_out.empty()) throw UsageError("transform output path is required");
        std::vector<fs::path> outputs{opts.transform_out};
        if (opts.log_out) outputs.push_back(*opts.log_out);
        require_distinct({opts.source, opts.target}, outputs);
        opts.icp.validate();

        const PointCloud source = crop_any(load_cloud_or_voxels(opts.source), opts.crops);
        const PointCloud target = crop_any(load_cloud_or_voxels(opts.target), opts.crops);
        if (source.empty() || target.empty()) throw InvalidArgument("a cloud is empty after cropping");

        out << "registering " << source.size() << " source points onto " << target.size() << " target points\n";
        IcpResult result;
        try {
            result = icp(source, target, opts.icp, opts.init);
        } catch (const DivergenceError &) {
            if (opts.log_out) write_file(*opts.log_out, std::string("iteration,rmse_m,correspondences\n"));
            throw;
        }

        std::string log = "iteration,rmse_m,correspondences\n";
        for (const auto &it : result.history) {
            log += std::to_string(it.iteration) + "," + format_double(it.rmse) + "," + std::to_string(it.correspondences) + "\n";
        }
        if (opts.log_out) write_file(*opts.log_out, log);
        write_file(opts.transform_out, format_transform(result.transform));

        out << "iterations = " << result.iterations_run << "\n"
            << "converged = " << (result.converged ? "true" : "false") << "\n"
            << "final_rmse_m = " << format_double(result.final_rmse) << "\n"
            << "correspondences = " << result.correspondence_count << "\n"
            << "transform -> " << opts.transform_out.string() << "\n";
        return kOk;
    });
}

int run_evaluate(const EvaluateOptions &opts, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        require_file(opts.map, "map cloud");
        require_file(opts.model, "model");
        require_file(opts.transform, "transform file");
        if (opts.report_out.empty()) throw UsageError("report output path is required");
        if (!(opts.threshold > 0.0)) throw UsageError("threshold must be > 0");
        if (!(opts.bin_width > 0.0)) throw UsageError("bin width must be > 0");
        const fs::path histogram_csv = opts.histogram_csv.value_or(sibling_with_suffix(opts.report_out, "_histogram.csv"));
        std::vector<fs::path> outputs{opts.report_out, histogram_csv};
        if (opts.aligned_map_out) outputs.push_back(*opts.aligned_map_out);
        require_distinct({opts.map, opts.model, opts.transform}, outputs);

        const RigidTransform t = parse_transform(read_file_text(opts.transform));
        const PointCloud map = transform_cloud(load_cloud_or_voxels(opts.map), t);
        const PointCloud model = load_cloud_or_voxels(opts.model);
        const SpatialIndex index(model);
        const EvaluationReport report = evaluate_map(map, index, opts.threshold, opts.bin_width);

        write_file(opts.report_out, format_report(report));
        write_file(histogram_csv, format_histogram_csv(report));
        if (opts.aligned_map_out) save_cloud(map, *opts.aligned_map_out);

        out << "map points = " << report.map_point_count << "\n"
            << "correspondences = " << report.correspondence_count << "\n"
            << "mean_error_m = " << format_double(report.mean_error) << "\n"
            << "std_dev_m = " << format_double(report.std_dev) << "\n"
            << "report -> " << opts.report_out.string() << "\n";
        if (report.correspondence_count == 0) {
            err << "warning: no map point lies within " << format_double(opts.threshold) << " m of the model\n";
            return kEmptyEvaluation;
        }
        return kOk;
    });
}

int run_coverage(const CoverageOptions &opts, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        require_file(opts.scene, "scene file");
        std::vector<fs::path> outputs;
        if (opts.report_out) outputs.push_back(*opts.report_out);
        if (opts.missing_csv) outputs.push_back(*opts.missing_csv);
        require_distinct({opts.scene}, outputs);

        const Scene scene = parse_scene(read_file_text(opts.scene));
        const SceneCamera *cine = scene.cine();
        if (!cine) throw ParseError("scene has no cine camera");
        const auto sensors = scene.sensor_frusta();
        if (sensors.empty()) throw ParseError("scene has no sensor cameras");
        const CoverageReport report =
            coverage_check(frustum_from(cine->pose, cine->intrinsics), sensors, scene.grid());

        const std::string text = format_coverage(report);
        if (opts.report_out) write_file(*opts.report_out, text);
        if (opts.missing_csv) write_file(*opts.missing_csv, format_missing_csv(report));
        out << text;
        return report.covered ? kOk : kUncovered;
    });
}

int run_place(const PlaceOptions &opts, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        require_file(opts.scene, "scene file");
        std::vector<fs::path> outputs;
        if (opts.report_out) outputs.push_back(*opts.report_out);
        if (opts.scene_out) outputs.push_back(*opts.scene_out);
        require_distinct({opts.scene}, outputs);

        Scene scene = parse_scene(read_file_text(opts.scene));
        const SceneCamera *cine = scene.cine();
        if (!cine) throw ParseError("scene has no cine camera (its intrinsics drive the placement)");
        const auto sensors = scene.sensor_frusta();
        if (sensors.empty()) throw ParseError("scene has no sensor cameras");
        const CinePlacement placed = place_cine_camera(sensors, scene.grid(), cine->intrinsics);

        for (auto &c : scene.cameras) {
            if (c.role == CameraRole::cine) c.pose = placed.pose;
        }
        const auto &p = placed.pose.position;
        const auto &q = placed.pose.orientation;
        std::string text = "# twinmap cine-camera placement\n";
        text += "altitude_m = " + format_double(placed.altitude) + "\n";
        text += "position = " + format_double(p.x()) + " " + format_double(p.y()) + " " + format_double(p.z()) + "\n";
        text += "orientation_xyzw = " + format_double(q.x()) + " " + format_double(q.y()) + " " + format_double(q.z()) +
                " " + format_double(q.w()) + "\n";
        text += format_coverage(placed.report);
        if (opts.report_out) write_file(*opts.report_out, text);
        if (opts.scene_out) write_file(*opts.scene_out, format_scene(scene));
        out << text;
        return kOk;
    });
}

int run_traj(const TrajOptions &opts, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        require_file(opts.trajectory, "trajectory file");
        require_file(opts.transform, "transform file");
        if (opts.output.empty()) throw UsageError("output path is required");
        require_distinct({opts.trajectory, opts.transform}, {opts.output});

        const Trajectory traj = parse_trajectory(read_file_text(opts.trajectory));
        const RigidTransform t = parse_transform(read_file_text(opts.transform));
        const Trajectory moved = transform_trajectory(traj, t);
        const auto ext = lower_extension(opts.output);
        write_file(opts.output, ext == ".txt" || ext == ".tum" ? format_trajectory(moved) : format_trajectory_csv(moved));
        out << moved.size() << " poses -> " << opts.output.string() << "\n";
        return kOk;
    });
}

int run_compare(const CompareOptions &opts, std::ostream &out, std::ostream &err) {
    return guarded(err, [&] {
        require_file(opts.report_a, "report");
        require_file(opts.report_b, "report");
        if (opts.output) require_distinct({opts.report_a, opts.report_b}, {*opts.output});
        const auto a = parse_report(read_file_text(opts.report_a));
        const auto b = parse_report(read_file_text(opts.report_b));
        const std::string text = format_comparison(compare_reports(a, b));
        if (opts.output) write_file(*opts.output, text);
        out << text;
        return kOk;
    });
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"twinmap: evaluate SLAM maps against digital-twin voxel ground truth"};
    app.require_subcommand(1);

    // voxel2cloud
    Voxel2CloudOptions v2c;
    std::string v2c_mode = "world";
    std::string v2c_encoding = "binary";
    std::string v2c_precision = "double";
    auto *cmd_v2c = app.add_subcommand("voxel2cloud", "Convert a binvox grid to a point cloud");
    cmd_v2c->add_option("input", v2c.input, "binvox file")->required();
    cmd_v2c->add_option("output", v2c.output, "output cloud (.ply, .xyz or .txt)")->required();
    cmd_v2c->add_option("--mode", v2c_mode, "normalized | world")->check(CLI::IsMember({"normalized", "world"}));
    cmd_v2c->add_flag("--surface-only", v2c.surface_only, "drop cells whose six face neighbors are occupied");
    cmd_v2c->add_option("--ply-encoding", v2c_encoding, "ascii | binary")->check(CLI::IsMember({"ascii", "binary"}));
    cmd_v2c->add_option("--ply-precision", v2c_precision, "float | double")->check(CLI::IsMember({"float", "double"}));

    // register
    RegisterOptions reg;
    std::string reg_config, reg_init;
    std::vector<std::string> reg_crops;
    std::string reg_log;
    double reg_radius = 0.0, reg_rmse = 0.0;
    std::size_t reg_iters = 0, reg_min_corr = 0;
    auto *cmd_reg = app.add_subcommand("register", "Align a map cloud to a ground-truth cloud with ICP");
    cmd_reg->add_option("source", reg.source, "moving cloud (estimated map)")->required();
    cmd_reg->add_option("target", reg.target, "fixed cloud (ground truth, cloud or .binvox)")->required();
    cmd_reg->add_option("-o,--transform-out", reg.transform_out, "transform output (12 numbers)")->required();
    cmd_reg->add_option("--log", reg_log, "per-iteration RMSE CSV");
    cmd_reg->add_option("--config", reg_config, "key=value config file");
    auto *opt_radius = cmd_reg->add_option("--search-radius", reg_radius, "meters");
    auto *opt_rmse = cmd_reg->add_option("--rmse-threshold", reg_rmse, "relative RMSE change");
    auto *opt_iters = cmd_reg->add_option("--max-iterations", reg_iters, "iteration cap");
    auto *opt_min = cmd_reg->add_option("--min-correspondences", reg_min_corr, "divergence floor");
    auto *opt_init = cmd_reg->add_option("--init", reg_init, "initial transform file (12 numbers)");
    auto *opt_crop = cmd_reg->add_option("--crop", reg_crops, "crop box 'minx miny minz maxx maxy maxz' (repeatable)");

    // evaluate
    EvaluateOptions ev;
    std::string ev_config, ev_hist, ev_aligned;
    double ev_threshold = 0.0, ev_bin = 0.0;
    auto *cmd_ev = app.add_subcommand("evaluate", "Correspondence statistics of an aligned map against a model");
    cmd_ev->add_option("map", ev.map, "estimated map cloud")->required();
    cmd_ev->add_option("model", ev.model, "ground-truth cloud or .binvox")->required();
    cmd_ev->add_option("-t,--transform", ev.transform, "map-to-model transform file")->required();
    cmd_ev->add_option("-o,--report", ev.report_out, "report text output")->required();
    cmd_ev->add_option("--histogram-csv", ev_hist, "histogram CSV output");
    cmd_ev->add_option("--aligned-map", ev_aligned, "write the transformed map cloud");
    cmd_ev->add_option("--config", ev_config, "key=value config file");
    auto *opt_thr = cmd_ev->add_option("--threshold", ev_threshold, "correspondence threshold, meters");
    auto *opt_bin = cmd_ev->add_option("--bin-width", ev_bin, "histogram bin width, meters");

    // coverage
    CoverageOptions cov;
    std::string cov_report, cov_csv;
    auto *cmd_cov = app.add_subcommand("coverage", "Check that the cine camera loads every sensor-visible tile");
    cmd_cov->add_option("scene", cov.scene, "scene file")->required();
    cmd_cov->add_option("-o,--report", cov_report, "coverage report output");
    cmd_cov->add_option("--missing-csv", cov_csv, "CSV of missing tile indices");

    // place
    PlaceOptions pl;
    std::string pl_report, pl_scene;
    auto *cmd_pl = app.add_subcommand("place", "Place a top-down cine camera that covers all sensor tiles");
    cmd_pl->add_option("scene", pl.scene, "scene file")->required();
    cmd_pl->add_option("-o,--report", pl_report, "placement report output");
    cmd_pl->add_option("--scene-out", pl_scene, "scene file with the placed cine camera");

    // traj
    TrajOptions tr;
    auto *cmd_tr = app.add_subcommand("traj", "Re-frame a trajectory with a registration transform");
    cmd_tr->add_option("trajectory", tr.trajectory, "trajectory (timestamp tx ty tz qx qy qz qw)")->required();
    cmd_tr->add_option("-t,--transform", tr.transform, "transform file")->required();
    cmd_tr->add_option("-o,--output", tr.output, "output (.csv, or .txt/.tum for pose text)")->required();

    // compare
    CompareOptions cmp;
    std::string cmp_out;
    auto *cmd_cmp = app.add_subcommand("compare", "Compare two evaluation reports");
    cmd_cmp->add_option("report_a", cmp.report_a, "first report")->required();
    cmd_cmp->add_option("report_b", cmp.report_b, "second report")->required();
    cmd_cmp->add_option("-o,--output", cmp_out, "comparison output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        app.exit(e, out, err);
        return kUsage;
    }

    if (cmd_v2c->parsed()) {
        v2c.mode = v2c_mode == "normalized" ? VoxelCoordinates::normalized : VoxelCoordinates::world;
        v2c.ply.encoding = v2c_encoding == "ascii" ? PlyEncoding::ascii : PlyEncoding::binary_little_endian;
        v2c.ply.precision = v2c_precision == "float" ? PlyPrecision::float32 : PlyPrecision::float64;
        return run_voxel2cloud(v2c, out, err);
    }
    if (cmd_reg->parsed()) {
        const int rc = guarded(err, [&] {
            if (!reg_config.empty()) {
                require_file(reg_config, "config file");
                apply_config(KeyValueConfig::parse(read_file_text(reg_config)), reg);
            }
            if (opt_radius->count()) reg.icp.search_radius = reg_radius;
            if (opt_rmse->count()) reg.icp.rmse_threshold = reg_rmse;
            if (opt_iters->count()) reg.icp.max_iterations = reg_iters;
            if (opt_min->count()) reg.icp.min_correspondences = reg_min_corr;
            if (opt_init->count()) {
                require_file(reg_init, "initial transform");
                reg.init = parse_transform(read_file_text(reg_init));
            }
            if (opt_crop->count()) {
                reg.crops.clear();
                for (const auto &c : reg_crops) reg.crops.push_back(parse_box(c));
            }
            if (!reg_log.empty()) reg.log_out = reg_log;
            return kOk;
        });
        return rc == kOk ? run_register(reg, out, err) : (rc == kInputError ? kUsage : rc);
    }
    if (cmd_ev->parsed()) {
        const int rc = guarded(err, [&] {
            if (!ev_config.empty()) {
                require_file(ev_config, "config file");
                apply_config(KeyValueConfig::parse(read_file_text(ev_config)), ev);
            }
            if (opt_thr->count()) ev.threshold = ev_threshold;
            if (opt_bin->count()) ev.bin_width = ev_bin;
            if (!ev_hist.empty()) ev.histogram_csv = ev_hist;
            if (!ev_aligned.empty()) ev.aligned_map_out = ev_aligned;
            return kOk;
        });
        return rc == kOk ? run_evaluate(ev, out, err) : (rc == kInputError ? kUsage : rc);
    }
    if (cmd_cov->parsed()) {
        if (!cov_report.empty()) cov.report_out = cov_report;
        if (!cov_csv.empty()) cov.missing_csv = cov_csv;
        return run_coverage(cov, out, err);
    }
    if (cmd_pl->parsed()) {
        if (!pl_report.empty()) pl.report_out = pl_report;
        if (!pl_scene.empty()) pl.scene_out = pl_scene;
        return run_place(pl, out, err);
    }
    if (cmd_tr->parsed()) return run_traj(tr, out, err);
    if (cmd_cmp->parsed()) {
        if (!cmp_out.empty()) cmp.output = cmp_out;
        return run_compare(cmp, out, err);
    }
    return kUsage;
}

}  // namespace twinmap::cli
