// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pickpoint {

/// Axis-aligned box with optional detection score.
struct BoundingBox3D {
    std::array<double, 3> center{};  // meters
    std::array<double, 3> size{};    // w, h, l; strictly positive
    std::optional<double> score;     // in [0, 1] when present
    std::string label = "picking_point";
};

/// Intersection volume over union volume of axis-aligned boxes.
double iou3d(const BoundingBox3D& a, const BoundingBox3D& b);

struct MatchPair {
    int pred_index = -1;
    int gt_index = -1;
    double iou = 0.0;
};

struct MatchResult {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int tn = 0;  // always 0: no negative boxes exist in open-world detection
    std::vector<MatchPair> pairs;
};

/// Greedy matching: predictions in descending score order (missing score
/// counts as 1.0), each taking the unmatched ground truth of highest
/// IoU >= iou_threshold. Every box matches at most once.
MatchResult match(std::span<const BoundingBox3D> preds, std::span<const BoundingBox3D> gts,
                  double iou_threshold);

struct DetectionMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;  // (TP+TN)/(TP+FN+FP+TN); with TN=0 this is TP/(TP+FP+FN)
    bool degenerate = false;  // some 0/0 denominator was hit and reported as 0
};

DetectionMetrics metrics(const MatchResult& m);

/// F1 from precision/recall directly (same units in, same units out).
double f1_score(double precision, double recall);

/// The per-prediction hit rate TP/(TP+FP), reported alongside the counting
/// accuracy because occlusion studies are commonly tabulated this way.
double accuracy_over_predictions(const MatchResult& m);

/// Signed per-axis center difference pred - gt, meters.
std::array<double, 3> localization_error(const BoundingBox3D& pred, const BoundingBox3D& gt);

struct LocalizationRecord {
    std::string scene_id;
    int pred_index = -1;
    int gt_index = -1;
    double iou = 0.0;
    std::array<double, 3> error{};  // dx, dy, dz
};

struct DatasetEvaluation {
    MatchResult totals;  // micro-aggregated counts; pairs left empty
    DetectionMetrics overall;
    double accuracy_over_predictions = 0.0;
    std::vector<std::pair<std::string, MatchResult>> per_scene;
    std::vector<LocalizationRecord> errors;
};

using SceneBoxes = std::map<std::string, std::vector<BoundingBox3D>>;

/// Micro-averaged evaluation over scenes aligned by identifier. Both maps
/// must cover exactly the same scene ids; a one-sided id is an error
/// naming the scene.
DatasetEvaluation evaluate_dataset(const SceneBoxes& pred_sets, const SceneBoxes& gt_sets,
                                   double iou_threshold);

/// Box file schema: {"scenes": [{"id": "...", "boxes": [{"center": [x,y,z],
/// "size": [w,h,l], "score"?: s, "label"?: "..."}]}]}.
SceneBoxes read_boxes(const std::filesystem::path& path);
void write_boxes(const SceneBoxes& scenes, const std::filesystem::path& path);

/// Evaluation report (JSON) and per-axis localization CSV
/// (scene,pred_index,gt_index,iou,dx,dy,dz).
void write_evaluation_report(const DatasetEvaluation& eval, const std::filesystem::path& path);
void write_localization_csv(const DatasetEvaluation& eval, const std::filesystem::path& path);

}  // namespace pickpoint
