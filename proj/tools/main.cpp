// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0
//
// pickpoint CLI: one subcommand per pipeline stage plus an end-to-end
// runner. stdout carries a single-line JSON summary per invocation; human
// diagnostics go to stderr. Exit codes: 0 success, 1 internal error,
// 2 usage/input error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pickpoint/cloud_io.hpp"
#include "pickpoint/detect.hpp"
#include "pickpoint/error.hpp"
#include "pickpoint/eval.hpp"
#include "pickpoint/geometry.hpp"
#include "pickpoint/network.hpp"
#include "pickpoint/preprocess.hpp"
#include "pickpoint/rng.hpp"
#include "pickpoint/stitch.hpp"
#include "pickpoint/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pickpoint;

namespace {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    long long ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void emit_summary(const json& j) { std::cout << j.dump() << std::endl; }

CloudWriteFormat parse_write_format(const std::string& s) {
    if (s == "ply-ascii") return CloudWriteFormat::PlyAscii;
    if (s == "ply-binary") return CloudWriteFormat::PlyBinaryLe;
    throw Error("unknown output format '" + s + "' (expected ply-ascii|ply-binary)");
}

json transform_to_json(const RigidTransform& t) {
    json arr = json::array();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) arr.push_back(t.matrix()(r, c));
    return arr;
}

// Removes every file this invocation wrote; used to drop partial outputs
// when a later stage fails.
struct OutputTracker {
    std::vector<fs::path> written;
    void note(const fs::path& p) { written.push_back(p); }
    void discard_all() {
        for (const auto& p : written) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
};

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

struct CalibrateArgs {
    std::string samples_file;
    std::string out_file;
};

int run_calibrate(const CalibrateArgs& args) {
    Stopwatch watch;
    const CalibrationSet set = read_calibration_set(args.samples_file);
    const RigidTransform hand_eye = estimate_hand_eye(set.samples, set.board_in_base);
    write_hand_eye(hand_eye, args.out_file);
    emit_summary({{"cmd", "calibrate"},
                  {"samples", set.samples.size()},
                  {"out", args.out_file},
                  {"ms", watch.ms()}});
    return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
    uint64_t seed = 1;
    std::string out_dir = ".";
    std::string scene_id = "scene";
    SceneSpec spec;
    NoiseModel noise{0.001, 0.02, 0.0, 0.0};
    int calib_count = 16;
    std::string occlusion = "none";
};

int run_synth(const SynthArgs& args) {
    Stopwatch watch;
    SceneSpec spec = args.spec;
    spec.seed = args.seed;
    spec.occlusion = occlusion_from_string(args.occlusion);
    const SyntheticScene scene = generate_scene(spec);
    const auto poses = canonical_view_poses(scene);

    fs::create_directories(args.out_dir);
    const fs::path dir = args.out_dir;

    // A plausible wrist-mounted camera offset; flange poses are derived so
    // stitching reproduces the world frame exactly.
    Rng rng(args.seed ^ 0x51ed270b0a1c6f4dULL);
    const Eigen::Vector3d he_axis(rng.normal(), rng.normal(), rng.normal());
    const RigidTransform hand_eye = RigidTransform::from_parts(
        Eigen::AngleAxisd(rng.uniform(0.1, 0.5), he_axis.normalized()).toRotationMatrix(),
        {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(0.05, 0.12)});

    json manifest;
    manifest["hand_eye"] = transform_to_json(hand_eye);
    manifest["views"] = json::array();
    const char* labels[3] = {"A", "B", "C"};
    for (int v = 0; v < 3; ++v) {
        ColoredPointCloud view = render_view(scene, poses[static_cast<size_t>(v)], args.noise,
                                             args.seed * 3 + static_cast<uint64_t>(v));
        view.frame_label = std::string("camera:") + labels[v];
        const std::string filename = std::string("view_") + static_cast<char>('a' + v) + ".ply";
        write_cloud(view, dir / filename, CloudWriteFormat::PlyBinaryLe);
        const RigidTransform flange = compose(poses[static_cast<size_t>(v)], invert(hand_eye));
        manifest["views"].push_back({{"label", labels[v]},
                                     {"cloud", filename},
                                     {"flange_in_base", transform_to_json(flange)}});
    }
    {
        std::ofstream out(dir / "manifest.json");
        if (!out) throw Error("cannot write manifest.json");
        out << manifest.dump(2) << "\n";
    }

    SceneBoxes gt;
    gt[args.scene_id] = scene.gt_boxes;
    write_boxes(gt, dir / "gt_boxes.json");

    const CalibrationSet calib = generate_calibration_set(
        hand_eye, args.calib_count, args.noise, args.seed ^ 0x7c4f2d1e9b3a5c68ULL);
    write_calibration_set(calib, dir / "calib_samples.json");

    write_cloud(scene.cloud, dir / "scene.ply", CloudWriteFormat::PlyBinaryLe);

    emit_summary({{"cmd", "synth"},
                  {"seed", args.seed},
                  {"scene_points", scene.cloud.size()},
                  {"gt_boxes", scene.gt_boxes.size()},
                  {"out_dir", args.out_dir},
                  {"ms", watch.ms()}});
    return 0;
}

// ---------------------------------------------------------------------------
// stitch / filter / downsample
// ---------------------------------------------------------------------------

int run_stitch(const std::string& manifest, const std::string& out, const std::string& format) {
    Stopwatch watch;
    const ViewSet set = read_view_set(manifest);
    const ColoredPointCloud stitched = stitch_views(set.views, set.hand_eye);
    write_cloud(stitched, out, parse_write_format(format));
    emit_summary({{"cmd", "stitch"},
                  {"views", set.views.size()},
                  {"points", stitched.size()},
                  {"ms", watch.ms()}});
    return 0;
}

struct FilterArgs {
    std::string in_file;
    std::string out_file;
    std::string kind = "color";
    std::string format = "ply-binary";
    ColorFilterParams color;
    StatFilterParams stat;
};

int run_filter(const FilterArgs& args) {
    Stopwatch watch;
    const ColoredPointCloud cloud = read_cloud(args.in_file);
    ColoredPointCloud out;
    if (args.kind == "color") {
        out = color_filter(cloud, args.color);
    } else if (args.kind == "statistical") {
        out = statistical_filter(cloud, args.stat);
    } else {
        throw Error("unknown filter kind '" + args.kind + "' (expected color|statistical)");
    }
    write_cloud(out, args.out_file, parse_write_format(args.format));
    emit_summary({{"cmd", "filter"},
                  {"kind", args.kind},
                  {"points_in", cloud.size()},
                  {"points_out", out.size()},
                  {"ms", watch.ms()}});
    return 0;
}

int run_downsample(const std::string& in_file, const std::string& out_file, double voxel_size,
                   const std::string& format) {
    Stopwatch watch;
    const ColoredPointCloud cloud = read_cloud(in_file);
    VoxelParams p;
    p.voxel_size = voxel_size;
    const ColoredPointCloud out = voxel_downsample(cloud, p);
    write_cloud(out, out_file, parse_write_format(format));
    emit_summary({{"cmd", "downsample"},
                  {"voxel_size", voxel_size},
                  {"points_in", cloud.size()},
                  {"points_out", out.size()},
                  {"ms", watch.ms()}});
    return 0;
}

// ---------------------------------------------------------------------------
// detect / eval / weights
// ---------------------------------------------------------------------------

std::vector<BoundingBox3D> detect_cloud(const ColoredPointCloud& cloud,
                                        const NetworkWeights& weights, double voxel_size,
                                        double score_threshold, double nms_iou) {
    const SparseTensor input = build_sparse_tensor(cloud, voxel_size);
    const auto levels = backbone_forward(input, weights);
    const auto neck = neck_forward(levels, weights);
    const auto head = head_forward(neck, weights);
    return decode_detections(head, voxel_size, score_threshold, nms_iou);
}

struct DetectArgs {
    std::string in_file;
    std::string weights_file;
    std::string out_file;
    std::string scene_id = "scene";
    double voxel_size = 0.01;
    double score_threshold = 0.3;
    double nms_iou = 0.5;
};

int run_detect(const DetectArgs& args) {
    Stopwatch watch;
    const ColoredPointCloud cloud = read_cloud(args.in_file);
    const NetworkWeights weights = load_weights(args.weights_file);
    const auto boxes =
        detect_cloud(cloud, weights, args.voxel_size, args.score_threshold, args.nms_iou);
    SceneBoxes scenes;
    scenes[args.scene_id] = boxes;
    write_boxes(scenes, args.out_file);
    emit_summary({{"cmd", "detect"},
                  {"points", cloud.size()},
                  {"detections", boxes.size()},
                  {"ms", watch.ms()}});
    return 0;
}

struct EvalArgs {
    std::string pred_file;
    std::string gt_file;
    std::string report_file;
    std::string csv_file;
    double iou_threshold = 0.25;
};

int run_eval(const EvalArgs& args) {
    Stopwatch watch;
    const SceneBoxes preds = read_boxes(args.pred_file);
    const SceneBoxes gts = read_boxes(args.gt_file);
    const DatasetEvaluation eval = evaluate_dataset(preds, gts, args.iou_threshold);
    if (!args.report_file.empty()) write_evaluation_report(eval, args.report_file);
    if (!args.csv_file.empty()) write_localization_csv(eval, args.csv_file);
    emit_summary({{"cmd", "eval"},
                  {"scenes", eval.per_scene.size()},
                  {"tp", eval.totals.tp},
                  {"fp", eval.totals.fp},
                  {"fn", eval.totals.fn},
                  {"precision", eval.overall.precision},
                  {"recall", eval.overall.recall},
                  {"f1", eval.overall.f1},
                  {"ms", watch.ms()}});
    return 0;
}

int run_weights(const std::string& out_file, const std::string& preset, uint64_t seed) {
    Stopwatch watch;
    NetworkWeights w;
    if (preset == "demo") {
        w = make_demo_weights();
    } else if (preset == "random") {
        w = make_random_weights(seed);
    } else {
        throw Error("unknown weights preset '" + preset + "' (expected demo|random)");
    }
    save_weights(w, out_file);
    emit_summary({{"cmd", "weights"},
                  {"preset", preset},
                  {"tensors", w.tensors.size()},
                  {"out", out_file},
                  {"ms", watch.ms()}});
    return 0;
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

struct PipelineArgs {
    std::string config_file;
    // every value is optional on the command line; config supplies the rest
    CLI::App* cmd = nullptr;
    std::string manifest, weights, out, out_cloud, gt, report, errors_csv, scene_id;
    int sigma1 = 100, sigma2 = 150, knn = 20;
    double alpha_v = 2.0, voxel_size = 0.01, score_threshold = 0.3, nms_iou = 0.5;
    double iou_threshold = 0.25;
    bool skip_detect = false;
};

// Config keys use exactly the flag names; explicit flags override the file.
template <typename T>
void merge_option(const CLI::App* cmd, const json& config, const std::string& flag, T& value) {
    if (cmd->count("--" + flag) > 0) return;  // flag wins
    if (config.contains(flag)) value = config.at(flag).get<T>();
}

int run_pipeline(PipelineArgs args) {
    Stopwatch watch;
    json config = json::object();
    if (!args.config_file.empty()) {
        std::ifstream in(args.config_file);
        if (!in) throw Error("cannot open config " + args.config_file);
        config = json::parse(in, nullptr, false);
        if (config.is_discarded()) throw Error("invalid JSON in " + args.config_file);
    }
    merge_option(args.cmd, config, "manifest", args.manifest);
    merge_option(args.cmd, config, "weights", args.weights);
    merge_option(args.cmd, config, "out", args.out);
    merge_option(args.cmd, config, "out-cloud", args.out_cloud);
    merge_option(args.cmd, config, "gt", args.gt);
    merge_option(args.cmd, config, "report", args.report);
    merge_option(args.cmd, config, "errors-csv", args.errors_csv);
    merge_option(args.cmd, config, "scene-id", args.scene_id);
    merge_option(args.cmd, config, "sigma1", args.sigma1);
    merge_option(args.cmd, config, "sigma2", args.sigma2);
    merge_option(args.cmd, config, "knn", args.knn);
    merge_option(args.cmd, config, "alpha-v", args.alpha_v);
    merge_option(args.cmd, config, "voxel-size", args.voxel_size);
    merge_option(args.cmd, config, "score-threshold", args.score_threshold);
    merge_option(args.cmd, config, "nms-iou", args.nms_iou);
    merge_option(args.cmd, config, "iou-threshold", args.iou_threshold);
    merge_option(args.cmd, config, "skip-detect", args.skip_detect);
    if (args.scene_id.empty()) args.scene_id = "scene";

    if (args.manifest.empty()) throw Error("pipeline: missing key manifest");
    if (!args.skip_detect && args.weights.empty()) throw Error("pipeline: missing key weights");
    if (!args.skip_detect && args.out.empty()) throw Error("pipeline: missing key out");
    if (args.skip_detect && args.out_cloud.empty()) {
        throw Error("pipeline: missing key out-cloud (required with skip-detect)");
    }

    // range validation up front, before any stage runs
    if (args.sigma1 < 0 || args.sigma1 > 255 || args.sigma2 < 0 || args.sigma2 > 255) {
        throw Error("pipeline: color thresholds must lie in [0, 255]");
    }
    if (args.knn < 1) throw Error("pipeline: knn must be >= 1");
    if (!(args.alpha_v > 0.0) || !(args.alpha_v < 3.0)) {
        throw Error("pipeline: alpha-v must lie strictly between 0 and 3");
    }
    if (!(args.voxel_size > 0.0)) throw Error("pipeline: voxel-size must be positive");
    if (args.score_threshold < 0.0 || args.score_threshold > 1.0 || args.nms_iou < 0.0 ||
        args.nms_iou > 1.0) {
        throw Error("pipeline: detection thresholds must lie in [0, 1]");
    }
    if (!(args.iou_threshold > 0.0) || args.iou_threshold > 1.0) {
        throw Error("pipeline: iou-threshold must lie in (0, 1]");
    }
    if (!fs::exists(args.manifest)) throw Error("pipeline: manifest not found: " + args.manifest);
    if (!args.skip_detect && !fs::exists(args.weights)) {
        throw Error("pipeline: weights not found: " + args.weights);
    }
    if (!args.gt.empty() && !fs::exists(args.gt)) {
        throw Error("pipeline: gt not found: " + args.gt);
    }

    OutputTracker outputs;
    try {
        // stage order: stitch, color filter, statistical filter, voxel
        // downsample, then detection
        const ViewSet set = read_view_set(args.manifest);
        ColoredPointCloud cloud = stitch_views(set.views, set.hand_eye);
        const size_t stitched_points = cloud.size();

        ColorFilterParams color;
        color.sigma1 = args.sigma1;
        color.sigma2 = args.sigma2;
        cloud = color_filter(cloud, color);

        StatFilterParams stat;
        stat.k = args.knn;
        stat.alpha_v = args.alpha_v;
        cloud = statistical_filter(cloud, stat);

        VoxelParams voxel;
        voxel.voxel_size = args.voxel_size;
        cloud = voxel_downsample(cloud, voxel);

        if (!args.out_cloud.empty()) {
            outputs.note(args.out_cloud);
            write_cloud(cloud, args.out_cloud, CloudWriteFormat::PlyBinaryLe);
        }

        json summary = {{"cmd", "pipeline"},
                        {"stitched_points", stitched_points},
                        {"preprocessed_points", cloud.size()},
                        {"skip_detect", args.skip_detect}};

        if (!args.skip_detect) {
            const NetworkWeights weights = load_weights(args.weights);
            const auto boxes = detect_cloud(cloud, weights, args.voxel_size,
                                            args.score_threshold, args.nms_iou);
            SceneBoxes scenes;
            scenes[args.scene_id] = boxes;
            outputs.note(args.out);
            write_boxes(scenes, args.out);
            summary["detections"] = boxes.size();

            if (!args.gt.empty()) {
                const SceneBoxes gt = read_boxes(args.gt);
                const DatasetEvaluation eval =
                    evaluate_dataset(scenes, gt, args.iou_threshold);
                if (!args.report.empty()) {
                    outputs.note(args.report);
                    write_evaluation_report(eval, args.report);
                }
                if (!args.errors_csv.empty()) {
                    outputs.note(args.errors_csv);
                    write_localization_csv(eval, args.errors_csv);
                }
                summary["tp"] = eval.totals.tp;
                summary["fp"] = eval.totals.fp;
                summary["fn"] = eval.totals.fn;
            }
        }
        summary["ms"] = watch.ms();
        emit_summary(summary);
    } catch (...) {
        outputs.discard_all();
        throw;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"point-cloud picking-point toolkit"};
    app.require_subcommand(1);

    CalibrateArgs calibrate;
    auto* cmd_calibrate =
        app.add_subcommand("calibrate", "estimate the hand-eye transform from a sample file");
    cmd_calibrate->add_option("--samples", calibrate.samples_file, "calibration sample JSON")
        ->required();
    cmd_calibrate->add_option("--out", calibrate.out_file, "output hand-eye JSON")->required();

    SynthArgs synth;
    auto* cmd_synth =
        app.add_subcommand("synth", "generate a synthetic scene with ground truth");
    cmd_synth->add_option("--seed", synth.seed, "scene seed");
    cmd_synth->add_option("--out-dir", synth.out_dir, "output directory")->required();
    cmd_synth->add_option("--scene-id", synth.scene_id, "scene identifier for box files");
    cmd_synth->add_option("--clusters", synth.spec.n_clusters, "fruit cluster count");
    cmd_synth->add_option("--cluster-radius", synth.spec.cluster_radius, "cluster radius [m]");
    cmd_synth->add_option("--stem-length", synth.spec.stem_length, "stem length [m]");
    cmd_synth->add_option("--stem-radius", synth.spec.stem_radius, "stem radius [m]");
    cmd_synth->add_option("--leaves", synth.spec.leaf_count, "leaf patch count");
    cmd_synth->add_option("--pitch", synth.spec.sampling_pitch, "surface sampling pitch [m]");
    cmd_synth->add_option("--occlusion", synth.occlusion, "none|slight|severe");
    cmd_synth->add_option("--depth-sigma", synth.noise.depth_sigma, "depth noise sigma [m]");
    cmd_synth->add_option("--dropout", synth.noise.dropout_rate, "point dropout rate");
    cmd_synth->add_option("--pose-rot-sigma", synth.noise.pose_rot_sigma,
                          "calibration rotation noise [deg]");
    cmd_synth->add_option("--pose-trans-sigma", synth.noise.pose_trans_sigma,
                          "calibration translation noise [m]");
    cmd_synth->add_option("--calib-count", synth.calib_count, "calibration pose count");

    std::string stitch_manifest, stitch_out, stitch_format = "ply-binary";
    auto* cmd_stitch = app.add_subcommand("stitch", "stitch a view set into the base frame");
    cmd_stitch->add_option("--manifest", stitch_manifest, "view-set manifest JSON")->required();
    cmd_stitch->add_option("--out", stitch_out, "output cloud path")->required();
    cmd_stitch->add_option("--format", stitch_format, "ply-ascii|ply-binary");

    FilterArgs filter;
    auto* cmd_filter = app.add_subcommand("filter", "color or statistical outlier filter");
    cmd_filter->add_option("--in", filter.in_file, "input cloud (.ply/.pcd)")->required();
    cmd_filter->add_option("--out", filter.out_file, "output cloud path")->required();
    cmd_filter->add_option("--kind", filter.kind, "color|statistical");
    cmd_filter->add_option("--sigma1", filter.color.sigma1, "red threshold");
    cmd_filter->add_option("--sigma2", filter.color.sigma2, "green threshold");
    cmd_filter->add_option("--knn", filter.stat.k, "neighbor count");
    cmd_filter->add_option("--alpha-v", filter.stat.alpha_v, "interval width multiplier");
    cmd_filter->add_option("--format", filter.format, "ply-ascii|ply-binary");

    std::string down_in, down_out, down_format = "ply-binary";
    double down_voxel = 0.01;
    auto* cmd_down = app.add_subcommand("downsample", "voxel-grid centroid downsampling");
    cmd_down->add_option("--in", down_in, "input cloud (.ply/.pcd)")->required();
    cmd_down->add_option("--out", down_out, "output cloud path")->required();
    cmd_down->add_option("--voxel-size", down_voxel, "voxel edge length [m]");
    cmd_down->add_option("--format", down_format, "ply-ascii|ply-binary");

    DetectArgs detect;
    auto* cmd_detect = app.add_subcommand("detect", "run the detector on a preprocessed cloud");
    cmd_detect->add_option("--in", detect.in_file, "input cloud (.ply/.pcd)")->required();
    cmd_detect->add_option("--weights", detect.weights_file, "weight file")->required();
    cmd_detect->add_option("--out", detect.out_file, "output detections JSON")->required();
    cmd_detect->add_option("--scene-id", detect.scene_id, "scene identifier");
    cmd_detect->add_option("--voxel-size", detect.voxel_size, "voxel edge length [m]");
    cmd_detect->add_option("--score-threshold", detect.score_threshold, "detection score cut");
    cmd_detect->add_option("--nms-iou", detect.nms_iou, "NMS IoU threshold");

    EvalArgs eval_args;
    auto* cmd_eval = app.add_subcommand("eval", "evaluate detections against ground truth");
    cmd_eval->add_option("--pred", eval_args.pred_file, "prediction boxes JSON")->required();
    cmd_eval->add_option("--gt", eval_args.gt_file, "ground-truth boxes JSON")->required();
    cmd_eval->add_option("--iou-threshold", eval_args.iou_threshold, "matching IoU threshold");
    cmd_eval->add_option("--report", eval_args.report_file, "metrics report JSON");
    cmd_eval->add_option("--errors-csv", eval_args.csv_file, "per-axis localization CSV");

    std::string weights_out, weights_preset = "demo";
    uint64_t weights_seed = 1;
    auto* cmd_weights = app.add_subcommand("weights", "emit detector weights");
    cmd_weights->add_option("--out", weights_out, "output weight file")->required();
    cmd_weights->add_option("--preset", weights_preset, "demo|random");
    cmd_weights->add_option("--seed", weights_seed, "seed for the random preset");

    PipelineArgs pipe;
    auto* cmd_pipe = app.add_subcommand("pipeline", "stitch, filter, downsample, detect, eval");
    cmd_pipe->add_option("--config", pipe.config_file, "flat JSON config (keys = flag names)");
    cmd_pipe->add_option("--manifest", pipe.manifest, "view-set manifest JSON");
    cmd_pipe->add_option("--weights", pipe.weights, "weight file");
    cmd_pipe->add_option("--out", pipe.out, "output detections JSON");
    cmd_pipe->add_option("--out-cloud", pipe.out_cloud, "preprocessed cloud output path");
    cmd_pipe->add_option("--gt", pipe.gt, "ground-truth boxes JSON (enables evaluation)");
    cmd_pipe->add_option("--report", pipe.report, "metrics report JSON");
    cmd_pipe->add_option("--errors-csv", pipe.errors_csv, "localization error CSV");
    cmd_pipe->add_option("--scene-id", pipe.scene_id, "scene identifier");
    cmd_pipe->add_option("--sigma1", pipe.sigma1, "red threshold");
    cmd_pipe->add_option("--sigma2", pipe.sigma2, "green threshold");
    cmd_pipe->add_option("--knn", pipe.knn, "neighbor count");
    cmd_pipe->add_option("--alpha-v", pipe.alpha_v, "interval width multiplier");
    cmd_pipe->add_option("--voxel-size", pipe.voxel_size, "voxel edge length [m]");
    cmd_pipe->add_option("--score-threshold", pipe.score_threshold, "detection score cut");
    cmd_pipe->add_option("--nms-iou", pipe.nms_iou, "NMS IoU threshold");
    cmd_pipe->add_option("--iou-threshold", pipe.iou_threshold, "matching IoU threshold");
    cmd_pipe->add_flag("--skip-detect", pipe.skip_detect, "stop after downsampling");
    pipe.cmd = cmd_pipe;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_calibrate->parsed()) return run_calibrate(calibrate);
        if (cmd_synth->parsed()) return run_synth(synth);
        if (cmd_stitch->parsed()) return run_stitch(stitch_manifest, stitch_out, stitch_format);
        if (cmd_filter->parsed()) return run_filter(filter);
        if (cmd_down->parsed()) return run_downsample(down_in, down_out, down_voxel, down_format);
        if (cmd_detect->parsed()) return run_detect(detect);
        if (cmd_eval->parsed()) return run_eval(eval_args);
        if (cmd_weights->parsed()) return run_weights(weights_out, weights_preset, weights_seed);
        if (cmd_pipe->parsed()) return run_pipeline(std::move(pipe));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
