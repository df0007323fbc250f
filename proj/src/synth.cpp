// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include "pickpoint/synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "pickpoint/error.hpp"
#include "pickpoint/rng.hpp"

namespace pickpoint {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Scene layout constants. Cluster spacing and branch radius are fixed;
// the tunable dimensions live in SceneSpec.
constexpr double kClusterSpacing = 0.16;
constexpr double kBranchRadius = 0.015;
constexpr double kBranchOverhang = 0.08;
constexpr double kLeafSide = 0.13;
constexpr double kGtBoxSide = 0.03;
constexpr double kColorJitter = 0.005;

struct Rgb {
    double r, g, b;
};

// Stem color is deliberately far from fruit/branch/leaf along the linear
// discriminant used by the constructed detector weights, while still
// passing the red-keep color filter.
constexpr Rgb kFruitColor = {0.80, 0.15, 0.15};
constexpr Rgb kStemColor = {0.55, 0.25, 0.75};
constexpr Rgb kBranchColor = {0.55, 0.30, 0.10};
constexpr Rgb kLeafColor = {0.20, 0.65, 0.20};

uint8_t quantize_channel(double v) {
    const double q = std::nearbyint(v * 255.0);
    return static_cast<uint8_t>(std::clamp(q, 0.0, 255.0));
}

void append_points(ColoredPointCloud& cloud, const std::vector<std::array<double, 3>>& positions,
                   const Rgb& base, Rng& rng) {
    for (const auto& p : positions) {
        ColoredPoint pt;
        pt.x = p[0];
        pt.y = p[1];
        pt.z = p[2];
        pt.r = quantize_channel(base.r + rng.uniform(-kColorJitter, kColorJitter));
        pt.g = quantize_channel(base.g + rng.uniform(-kColorJitter, kColorJitter));
        pt.b = quantize_channel(base.b + rng.uniform(-kColorJitter, kColorJitter));
        cloud.points.push_back(pt);
    }
}

Eigen::Vector3d to_vec(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

std::array<double, 3> to_array(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Eigen::Vector3d random_unit_vector(Rng& rng) {
    Eigen::Vector3d v;
    do {
        v = {rng.normal(), rng.normal(), rng.normal()};
    } while (v.norm() < 1e-9);
    return v.normalized();
}

}  // namespace

OcclusionLevel occlusion_from_string(const std::string& s) {
    if (s == "none") return OcclusionLevel::None;
    if (s == "slight") return OcclusionLevel::Slight;
    if (s == "severe") return OcclusionLevel::Severe;
    throw Error("unknown occlusion level '" + s + "' (expected none|slight|severe)");
}

std::string to_string(OcclusionLevel level) {
    switch (level) {
        case OcclusionLevel::None: return "none";
        case OcclusionLevel::Slight: return "slight";
        case OcclusionLevel::Severe: return "severe";
    }
    return "none";
}

std::vector<std::array<double, 3>> sample_sphere(const std::array<double, 3>& center,
                                                 double radius, double pitch) {
    const double area = 4.0 * kPi * radius * radius;
    const int64_t n = std::max<int64_t>(1, std::llround(area / (pitch * pitch)));
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    std::vector<std::array<double, 3>> out;
    out.reserve(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = static_cast<double>(i) * golden;
        out.push_back({center[0] + radius * std::cos(phi) * rxy,
                       center[1] + radius * std::sin(phi) * rxy, center[2] + radius * z});
    }
    return out;
}

std::vector<std::array<double, 3>> sample_cylinder(const std::array<double, 3>& p0,
                                                   const std::array<double, 3>& p1, double radius,
                                                   double pitch) {
    const Eigen::Vector3d a = to_vec(p0);
    const Eigen::Vector3d b = to_vec(p1);
    const Eigen::Vector3d axis = b - a;
    const double length = axis.norm();
    if (length <= 0.0) return {};
    const Eigen::Vector3d n = axis / length;
    const Eigen::Vector3d ref =
        std::abs(n.z()) < 0.9 ? Eigen::Vector3d(0, 0, 1) : Eigen::Vector3d(1, 0, 0);
    const Eigen::Vector3d e1 = n.cross(ref).normalized();
    const Eigen::Vector3d e2 = n.cross(e1);

    const int64_t n_theta = std::max<int64_t>(3, std::llround(2.0 * kPi * radius / pitch));
    const int64_t n_h = std::max<int64_t>(1, std::llround(length / pitch));
    std::vector<std::array<double, 3>> out;
    out.reserve(static_cast<size_t>(n_theta * n_h));
    for (int64_t j = 0; j < n_h; ++j) {
        const double h = (static_cast<double>(j) + 0.5) / static_cast<double>(n_h) * length;
        const double stagger = (j % 2 == 0) ? 0.0 : 0.5;
        for (int64_t t = 0; t < n_theta; ++t) {
            const double theta =
                2.0 * kPi * (static_cast<double>(t) + stagger) / static_cast<double>(n_theta);
            const Eigen::Vector3d p =
                a + n * h + radius * (std::cos(theta) * e1 + std::sin(theta) * e2);
            out.push_back(to_array(p));
        }
    }
    return out;
}

std::vector<std::array<double, 3>> sample_patch(const std::array<double, 3>& center,
                                                const std::array<double, 3>& normal, double side,
                                                double pitch) {
    const Eigen::Vector3d n = to_vec(normal).normalized();
    const Eigen::Vector3d ref =
        std::abs(n.z()) < 0.9 ? Eigen::Vector3d(0, 0, 1) : Eigen::Vector3d(1, 0, 0);
    const Eigen::Vector3d t1 = n.cross(ref).normalized();
    const Eigen::Vector3d t2 = n.cross(t1);
    const int64_t n_s = std::max<int64_t>(1, std::llround(side / pitch));
    std::vector<std::array<double, 3>> out;
    out.reserve(static_cast<size_t>(n_s * n_s));
    const Eigen::Vector3d c = to_vec(center);
    for (int64_t i = 0; i < n_s; ++i) {
        for (int64_t j = 0; j < n_s; ++j) {
            const double u = ((static_cast<double>(i) + 0.5) / static_cast<double>(n_s) - 0.5) * side;
            const double v = ((static_cast<double>(j) + 0.5) / static_cast<double>(n_s) - 0.5) * side;
            out.push_back(to_array(c + u * t1 + v * t2));
        }
    }
    return out;
}

SyntheticScene generate_scene(const SceneSpec& spec) {
    if (!(spec.sampling_pitch > 0.0)) throw Error("degenerate scene spec: zero sampling pitch");
    if (spec.n_clusters < 1) throw Error("degenerate scene spec: n_clusters must be >= 1");
    if (!(spec.cluster_radius > 0.0) || !(spec.stem_length > 0.0) ||
        !(spec.stem_radius > 0.0)) {
        throw Error("degenerate scene spec: dimensions must be positive");
    }

    SyntheticScene scene;
    const double pitch = spec.sampling_pitch;
    const double x0 = -kClusterSpacing * (spec.n_clusters - 1) / 2.0;

    Rng geometry_rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    Rng color_rng(spec.seed ^ 0x5851f42d4c957f2dULL);

    // Random world offset so scenes never align with any processing grid.
    const std::array<double, 3> shift = {geometry_rng.uniform(0.0, 0.02),
                                         geometry_rng.uniform(0.0, 0.02),
                                         geometry_rng.uniform(0.0, 0.02)};

    // Fruit clusters hang with +-1 cm scatter; every stem stretches from its
    // sphere top to the fixed branch line, so stem lengths vary slightly
    // around spec.stem_length. Geometry is identical across occlusion levels
    // for a given seed.
    const double branch_bottom = spec.cluster_radius + spec.stem_length + shift[2];
    std::vector<std::array<double, 3>> stem_mids;
    for (int k = 0; k < spec.n_clusters; ++k) {
        const std::array<double, 3> jitter = {geometry_rng.uniform(-0.01, 0.01),
                                              geometry_rng.uniform(-0.01, 0.01),
                                              geometry_rng.uniform(-0.01, 0.01)};
        const std::array<double, 3> c = {x0 + k * kClusterSpacing + shift[0] + jitter[0],
                                         shift[1] + jitter[1], shift[2] + jitter[2]};
        scene.cluster_centers.push_back(c);
        append_points(scene.cloud, sample_sphere(c, spec.cluster_radius, pitch), kFruitColor,
                      color_rng);

        const std::array<double, 3> stem_base = {c[0], c[1], c[2] + spec.cluster_radius};
        const std::array<double, 3> stem_top = {c[0], c[1], branch_bottom};
        append_points(scene.cloud, sample_cylinder(stem_base, stem_top, spec.stem_radius, pitch),
                      kStemColor, color_rng);

        const std::array<double, 3> mid = {c[0], c[1], (stem_base[2] + stem_top[2]) / 2.0};
        stem_mids.push_back(mid);
        BoundingBox3D box;
        box.center = mid;
        box.size = {kGtBoxSide, kGtBoxSide, kGtBoxSide};
        scene.gt_boxes.push_back(box);
    }

    // Horizontal supporting branch resting on the stem tops.
    const double branch_z = branch_bottom + kBranchRadius;
    const std::array<double, 3> branch_a = {x0 - kBranchOverhang + shift[0], shift[1], branch_z};
    const std::array<double, 3> branch_b = {
        x0 + (spec.n_clusters - 1) * kClusterSpacing + kBranchOverhang + shift[0], shift[1],
        branch_z};
    append_points(scene.cloud, sample_cylinder(branch_a, branch_b, kBranchRadius, pitch),
                  kBranchColor, color_rng);

    // Leaf parameters are drawn identically for every occlusion level; only
    // the placement rule changes, so visible-fruit counts are comparable
    // across levels at equal seeds.
    struct LeafParams {
        double azimuth, height, radial, tilt;
        int cluster;
    };
    std::vector<LeafParams> leaf_params;
    for (int i = 0; i < spec.leaf_count; ++i) {
        LeafParams lp;
        lp.azimuth = geometry_rng.uniform(0.0, 2.0 * kPi);
        lp.height = geometry_rng.uniform(-0.5, 0.5);
        lp.radial = geometry_rng.uniform(0.0, 1.0);
        lp.tilt = geometry_rng.uniform(-0.3, 0.3);
        lp.cluster = i % spec.n_clusters;
        leaf_params.push_back(lp);
    }

    for (int i = 0; i < spec.leaf_count; ++i) {
        const LeafParams& lp = leaf_params[i];
        const auto& cc = scene.cluster_centers[static_cast<size_t>(lp.cluster)];
        std::array<double, 3> pos;
        std::array<double, 3> normal;
        double side = kLeafSide;
        const bool blocker =
            spec.occlusion == OcclusionLevel::Severe && i < 2 * spec.n_clusters;
        if (blocker) {
            // Directly between the cameras (negative y side) and the cluster,
            // large enough to cover both the fruit and its stem.
            const auto& mid = stem_mids[static_cast<size_t>(lp.cluster)];
            pos = {mid[0] + 0.02 * lp.tilt, mid[1] - (0.07 + 0.04 * lp.radial),
                   (mid[2] + cc[2]) / 2.0 + 0.01 * lp.height};
            normal = {0.0, 1.0, 0.0};
            side = 2.2 * kLeafSide;
        } else if (spec.occlusion == OcclusionLevel::None) {
            // Behind the canopy; never between a camera and the fruit.
            pos = {cc[0] + 0.10 * std::cos(lp.azimuth),
                   cc[1] + 0.14 + 0.08 * lp.radial,
                   cc[2] + 0.10 * lp.height};
            normal = {std::sin(lp.tilt), std::cos(lp.tilt), 0.2 * lp.height};
        } else {
            // Lateral scatter at fruit height: grazing occlusion that leaves
            // the stems mostly visible.
            const double radius = spec.cluster_radius + 0.05 + 0.06 * lp.radial;
            pos = {cc[0] + radius * std::cos(lp.azimuth), cc[1] + radius * std::sin(lp.azimuth),
                   cc[2] + 0.06 * lp.height};
            normal = {std::cos(lp.azimuth + lp.tilt), std::sin(lp.azimuth + lp.tilt), 0.3};
        }
        append_points(scene.cloud, sample_patch(pos, normal, side, pitch), kLeafColor,
                      color_rng);
    }

    scene.cloud.frame_label = "world";
    scene.surface_samples.reserve(scene.cloud.size());
    for (const auto& p : scene.cloud.points) scene.surface_samples.push_back({p.x, p.y, p.z});

    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    for (const auto& b : scene.gt_boxes) center += to_vec(b.center);
    scene.center = to_array(center / static_cast<double>(scene.gt_boxes.size()));
    return scene;
}

std::array<RigidTransform, 3> canonical_view_poses(const SyntheticScene& scene) {
    const Eigen::Vector3d target = to_vec(scene.center);
    std::array<RigidTransform, 3> poses;
    const double azimuths[3] = {0.0, kPi / 4.0, -kPi / 4.0};
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d position =
            target + 0.5 * Eigen::Vector3d(std::sin(azimuths[i]), -std::cos(azimuths[i]), 0.0);
        const Eigen::Vector3d forward = (target - position).normalized();
        const Eigen::Vector3d up(0.0, 0.0, 1.0);
        const Eigen::Vector3d x_cam = forward.cross(up).normalized();
        const Eigen::Vector3d y_cam = forward.cross(x_cam);
        Eigen::Matrix3d rot;
        rot.col(0) = x_cam;
        rot.col(1) = y_cam;
        rot.col(2) = forward;
        poses[static_cast<size_t>(i)] = RigidTransform::from_parts(rot, position);
    }
    return poses;
}

ColoredPointCloud render_view(const SyntheticScene& scene, const RigidTransform& camera_in_world,
                              const NoiseModel& noise, uint64_t seed) {
    if (noise.depth_sigma < 0.0 || noise.dropout_rate < 0.0 || noise.dropout_rate >= 1.0 ||
        noise.pose_rot_sigma < 0.0 || noise.pose_trans_sigma < 0.0) {
        throw Error("invalid noise model");
    }
    constexpr int kGrid = 512;
    constexpr double kMaxRange = 2.0;
    const double tan_half = std::tan(kPi / 6.0);  // 60 degree total field of view

    const RigidTransform world_to_camera = invert(camera_in_world);
    const Eigen::Matrix3d rot = world_to_camera.rotation();
    const Eigen::Vector3d trans = world_to_camera.translation();

    struct Hit {
        double depth;
        uint32_t index;
    };
    std::unordered_map<int32_t, Hit> zbuffer;
    zbuffer.reserve(scene.cloud.size() / 2 + 16);
    std::vector<Eigen::Vector3d> camera_points(scene.cloud.size());

    for (size_t i = 0; i < scene.cloud.size(); ++i) {
        const auto& p = scene.cloud.points[i];
        const Eigen::Vector3d q = rot * Eigen::Vector3d(p.x, p.y, p.z) + trans;
        camera_points[i] = q;
        if (q.z() <= 0.0 || q.z() > kMaxRange) continue;
        const double nx = q.x() / (q.z() * tan_half);
        const double ny = q.y() / (q.z() * tan_half);
        if (nx < -1.0 || nx > 1.0 || ny < -1.0 || ny > 1.0) continue;
        const int32_t u = std::min(kGrid - 1, static_cast<int32_t>((nx + 1.0) / 2.0 * kGrid));
        const int32_t v = std::min(kGrid - 1, static_cast<int32_t>((ny + 1.0) / 2.0 * kGrid));
        const int32_t cell = v * kGrid + u;
        auto [it, inserted] = zbuffer.try_emplace(cell, Hit{q.z(), static_cast<uint32_t>(i)});
        if (!inserted && q.z() < it->second.depth) {
            it->second = {q.z(), static_cast<uint32_t>(i)};
        }
    }

    std::vector<bool> visible(scene.cloud.size(), false);
    for (const auto& [cell, hit] : zbuffer) visible[hit.index] = true;

    Rng rng(seed ^ 0xd6e8feb86659fd93ULL);
    ColoredPointCloud out;
    out.frame_label = "camera";
    for (size_t i = 0; i < scene.cloud.size(); ++i) {
        if (!visible[i]) continue;
        if (noise.dropout_rate > 0.0 && rng.uniform01() < noise.dropout_rate) continue;
        Eigen::Vector3d q = camera_points[i];
        if (noise.depth_sigma > 0.0) {
            const Eigen::Vector3d dir = q.normalized();
            q += rng.normal(0.0, noise.depth_sigma) * dir;
        }
        const auto& p = scene.cloud.points[i];
        out.points.push_back({q.x(), q.y(), q.z(), p.r, p.g, p.b});
    }
    return out;
}

CalibrationSet generate_calibration_set(const RigidTransform& t_true, int n_c,
                                        const NoiseModel& noise, uint64_t seed) {
    if (n_c < 1) throw Error("calibration set needs at least one pose");
    Rng rng(seed ^ 0xa0761d6478bd642fULL);

    CalibrationSet set;
    {
        const Eigen::Vector3d axis = random_unit_vector(rng);
        const double angle = rng.uniform(0.0, kPi / 6.0);
        const Eigen::Vector3d t = {rng.uniform(0.3, 0.5), rng.uniform(-0.1, 0.1),
                                   rng.uniform(0.0, 0.1)};
        set.board_in_base = RigidTransform::from_parts(axis_angle(axis, angle), t);
    }

    const RigidTransform t_true_inv = invert(t_true);
    const RigidTransform board_in_base_inv = invert(set.board_in_base);
    for (int i = 0; i < n_c; ++i) {
        CalibrationSample sample;
        sample.pose_index = i + 1;

        const Eigen::Vector3d axis = random_unit_vector(rng);
        const double angle = rng.uniform(0.0, kPi / 4.0);
        const Eigen::Vector3d t = {rng.uniform(0.3, 0.7), rng.uniform(-0.2, 0.2),
                                   rng.uniform(0.2, 0.6)};
        sample.flange_in_base = RigidTransform::from_parts(axis_angle(axis, angle), t);

        // Exact closed-loop observation, then measurement noise.
        RigidTransform board_to_camera =
            compose(compose(t_true_inv, invert(sample.flange_in_base)), board_in_base_inv);
        if (noise.pose_rot_sigma > 0.0 || noise.pose_trans_sigma > 0.0) {
            const Eigen::Vector3d naxis = random_unit_vector(rng);
            const double nangle = rng.normal(0.0, noise.pose_rot_sigma * kPi / 180.0);
            const Eigen::Vector3d nt = {rng.normal(0.0, noise.pose_trans_sigma),
                                        rng.normal(0.0, noise.pose_trans_sigma),
                                        rng.normal(0.0, noise.pose_trans_sigma)};
            board_to_camera =
                compose(RigidTransform::from_parts(axis_angle(naxis, nangle), nt),
                        board_to_camera);
        }
        sample.board_to_camera = board_to_camera;
        set.samples.push_back(std::move(sample));
    }
    return set;
}

}  // namespace pickpoint
