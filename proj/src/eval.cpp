// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include "pickpoint/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "pickpoint/error.hpp"

namespace pickpoint {

double iou3d(const BoundingBox3D& a, const BoundingBox3D& b) {
    double inter = 1.0;
    for (int axis = 0; axis < 3; ++axis) {
        const double a_lo = a.center[axis] - a.size[axis] / 2.0;
        const double a_hi = a.center[axis] + a.size[axis] / 2.0;
        const double b_lo = b.center[axis] - b.size[axis] / 2.0;
        const double b_hi = b.center[axis] + b.size[axis] / 2.0;
        const double overlap = std::min(a_hi, b_hi) - std::max(a_lo, b_lo);
        if (overlap <= 0.0) return 0.0;
        inter *= overlap;
    }
    const double vol_a = a.size[0] * a.size[1] * a.size[2];
    const double vol_b = b.size[0] * b.size[1] * b.size[2];
    return inter / (vol_a + vol_b - inter);
}

MatchResult match(std::span<const BoundingBox3D> preds, std::span<const BoundingBox3D> gts,
                  double iou_threshold) {
    if (!(iou_threshold > 0.0) || iou_threshold > 1.0) {
        throw Error("match: iou threshold must lie in (0, 1]");
    }

    std::vector<int> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    auto score_of = [&](int i) { return preds[static_cast<size_t>(i)].score.value_or(1.0); };
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return score_of(a) > score_of(b); });

    MatchResult result;
    std::vector<bool> gt_taken(gts.size(), false);
    for (int pi : order) {
        int best_gt = -1;
        double best_iou = 0.0;
        for (size_t gi = 0; gi < gts.size(); ++gi) {
            if (gt_taken[gi]) continue;
            const double v = iou3d(preds[static_cast<size_t>(pi)], gts[gi]);
            if (v >= iou_threshold && v > best_iou) {
                best_iou = v;
                best_gt = static_cast<int>(gi);
            }
        }
        if (best_gt >= 0) {
            gt_taken[static_cast<size_t>(best_gt)] = true;
            result.pairs.push_back({pi, best_gt, best_iou});
        }
    }
    result.tp = static_cast<int>(result.pairs.size());
    result.fp = static_cast<int>(preds.size()) - result.tp;
    result.fn = static_cast<int>(gts.size()) - result.tp;
    result.tn = 0;
    return result;
}

namespace {

double safe_ratio(double num, double den, bool& degenerate) {
    if (den == 0.0) {
        degenerate = true;
        return 0.0;
    }
    return num / den;
}

}  // namespace

double f1_score(double precision, double recall) {
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

DetectionMetrics metrics(const MatchResult& m) {
    DetectionMetrics out;
    const double tp = m.tp, fp = m.fp, fn = m.fn, tn = m.tn;
    out.precision = safe_ratio(tp, tp + fp, out.degenerate);
    out.recall = safe_ratio(tp, tp + fn, out.degenerate);
    if (out.precision + out.recall == 0.0) {
        out.f1 = 0.0;
        out.degenerate = true;
    } else {
        out.f1 = f1_score(out.precision, out.recall);
    }
    out.accuracy = safe_ratio(tp + tn, tp + fn + fp + tn, out.degenerate);
    return out;
}

double accuracy_over_predictions(const MatchResult& m) {
    const double den = m.tp + m.fp;
    return den == 0.0 ? 0.0 : m.tp / den;
}

std::array<double, 3> localization_error(const BoundingBox3D& pred, const BoundingBox3D& gt) {
    return {pred.center[0] - gt.center[0], pred.center[1] - gt.center[1],
            pred.center[2] - gt.center[2]};
}

DatasetEvaluation evaluate_dataset(const SceneBoxes& pred_sets, const SceneBoxes& gt_sets,
                                   double iou_threshold) {
    for (const auto& [id, boxes] : pred_sets) {
        if (!gt_sets.contains(id)) throw Error("scene '" + id + "' has predictions but no ground truth");
    }
    for (const auto& [id, boxes] : gt_sets) {
        if (!pred_sets.contains(id)) throw Error("scene '" + id + "' has ground truth but no predictions");
    }

    DatasetEvaluation eval;
    for (const auto& [id, gts] : gt_sets) {
        const auto& preds = pred_sets.at(id);
        MatchResult m = match(preds, gts, iou_threshold);
        eval.totals.tp += m.tp;
        eval.totals.fp += m.fp;
        eval.totals.fn += m.fn;
        for (const auto& pair : m.pairs) {
            LocalizationRecord rec;
            rec.scene_id = id;
            rec.pred_index = pair.pred_index;
            rec.gt_index = pair.gt_index;
            rec.iou = pair.iou;
            rec.error = localization_error(preds[static_cast<size_t>(pair.pred_index)],
                                           gts[static_cast<size_t>(pair.gt_index)]);
            eval.errors.push_back(std::move(rec));
        }
        eval.per_scene.emplace_back(id, std::move(m));
    }
    eval.overall = metrics(eval.totals);
    eval.accuracy_over_predictions = accuracy_over_predictions(eval.totals);
    return eval;
}

namespace {

using nlohmann::json;

BoundingBox3D box_from_json(const json& j) {
    BoundingBox3D box;
    const auto& c = j.at("center");
    const auto& s = j.at("size");
    if (!c.is_array() || c.size() != 3 || !s.is_array() || s.size() != 3) {
        throw Error("box: center and size must be 3-element arrays");
    }
    for (int i = 0; i < 3; ++i) {
        box.center[static_cast<size_t>(i)] = c[i].get<double>();
        box.size[static_cast<size_t>(i)] = s[i].get<double>();
        if (!(box.size[static_cast<size_t>(i)] > 0.0)) {
            throw Error("box: sizes must be strictly positive");
        }
    }
    if (j.contains("score")) {
        box.score = j.at("score").get<double>();
        if (*box.score < 0.0 || *box.score > 1.0) throw Error("box: score must lie in [0, 1]");
    }
    box.label = j.value("label", std::string("picking_point"));
    return box;
}

json box_to_json(const BoundingBox3D& box) {
    json j;
    j["center"] = {box.center[0], box.center[1], box.center[2]};
    j["size"] = {box.size[0], box.size[1], box.size[2]};
    if (box.score) j["score"] = *box.score;
    j["label"] = box.label;
    return j;
}

}  // namespace

SceneBoxes read_boxes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error("invalid JSON in " + path.string());
    if (!j.contains("scenes") || !j.at("scenes").is_array()) {
        throw Error(path.string() + ": missing scenes array");
    }
    SceneBoxes out;
    for (const auto& scene : j.at("scenes")) {
        const std::string id = scene.at("id").get<std::string>();
        auto [it, inserted] = out.try_emplace(id);
        if (!inserted) throw Error(path.string() + ": duplicate scene id '" + id + "'");
        for (const auto& box : scene.value("boxes", json::array())) {
            it->second.push_back(box_from_json(box));
        }
    }
    return out;
}

void write_boxes(const SceneBoxes& scenes, const std::filesystem::path& path) {
    json j;
    j["scenes"] = json::array();
    for (const auto& [id, boxes] : scenes) {
        json s;
        s["id"] = id;
        s["boxes"] = json::array();
        for (const auto& box : boxes) s["boxes"].push_back(box_to_json(box));
        j["scenes"].push_back(std::move(s));
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

void write_evaluation_report(const DatasetEvaluation& eval, const std::filesystem::path& path) {
    json j;
    j["tp"] = eval.totals.tp;
    j["fp"] = eval.totals.fp;
    j["fn"] = eval.totals.fn;
    j["precision"] = eval.overall.precision;
    j["recall"] = eval.overall.recall;
    j["f1"] = eval.overall.f1;
    // Counting accuracy (TN = 0): TP / (TP + FP + FN).
    j["accuracy"] = eval.overall.accuracy;
    // Per-prediction hit rate: TP / (TP + FP).
    j["accuracy_over_predictions"] = eval.accuracy_over_predictions;
    j["degenerate"] = eval.overall.degenerate;
    j["scenes"] = json::array();
    for (const auto& [id, m] : eval.per_scene) {
        j["scenes"].push_back({{"id", id}, {"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}});
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

void write_localization_csv(const DatasetEvaluation& eval, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "scene,pred_index,gt_index,iou,dx,dy,dz\n";
    char buf[160];
    for (const auto& rec : eval.errors) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g\n", rec.pred_index,
                      rec.gt_index, rec.iou, rec.error[0], rec.error[1], rec.error[2]);
        out << rec.scene_id << "," << buf;
    }
}

}  // namespace pickpoint
