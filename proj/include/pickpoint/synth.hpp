// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pickpoint/eval.hpp"
#include "pickpoint/geometry.hpp"
#include "pickpoint/point_cloud.hpp"

namespace pickpoint {

enum class OcclusionLevel { None, Slight, Severe };

OcclusionLevel occlusion_from_string(const std::string& s);
std::string to_string(OcclusionLevel level);

/// Parametric orchard scene: red fruit-cluster spheres hanging from a
/// horizontal branch, one short vertical stem above each cluster (the
/// cutting target), green planar leaves. All primitives are analytic so
/// tests can check rendered and stitched points against ground truth.
struct SceneSpec {
    uint64_t seed = 1;
    int n_clusters = 3;
    double cluster_radius = 0.075;   // meters
    double stem_length = 0.05;      // meters
    double stem_radius = 0.004;     // meters
    int leaf_count = 16;
    double sampling_pitch = 0.0015; // meters between surface samples
    OcclusionLevel occlusion = OcclusionLevel::None;
};

struct SyntheticScene {
    ColoredPointCloud cloud;                           // world frame
    std::vector<BoundingBox3D> gt_boxes;               // 3 cm cubes on stem midpoints
    std::vector<std::array<double, 3>> surface_samples;  // reference set for stitching oracles
    std::array<double, 3> center{};                    // scene center (camera aim point)
    std::vector<std::array<double, 3>> cluster_centers;
};

struct NoiseModel {
    double depth_sigma = 0.0;      // meters, along the camera ray
    double dropout_rate = 0.0;     // [0, 1)
    double pose_rot_sigma = 0.0;   // degrees
    double pose_trans_sigma = 0.0; // meters
};

/// Deterministic for a given spec (bit-identical across runs).
SyntheticScene generate_scene(const SceneSpec& spec);

/// Simulates one capture: world points into the camera frame, 60-degree
/// square frustum and 2 m range cull, z-buffer occlusion on a 512x512 grid
/// (nearest point per cell wins), Gaussian depth noise along the ray, and
/// random dropout. Returns a camera-frame cloud; deterministic per seed.
ColoredPointCloud render_view(const SyntheticScene& scene, const RigidTransform& camera_in_world,
                              const NoiseModel& noise, uint64_t seed);

/// The three canonical capture poses: frontal and +-45 degree azimuth at
/// 0.5 m standoff from the scene center.
std::array<RigidTransform, 3> canonical_view_poses(const SyntheticScene& scene);

/// Synthesizes a calibration run: n_c random flange poses with board
/// observations constructed so each closed-loop term inverts to t_true
/// exactly, then perturbed by the noise model (rotation/translation noise
/// on the measured board pose). Deterministic per seed.
CalibrationSet generate_calibration_set(const RigidTransform& t_true, int n_c,
                                        const NoiseModel& noise, uint64_t seed);

/// Analytic primitive samplers (quasi-uniform at the given pitch); exposed
/// so tests can assemble scenes from scratch.
std::vector<std::array<double, 3>> sample_sphere(const std::array<double, 3>& center,
                                                 double radius, double pitch);
std::vector<std::array<double, 3>> sample_cylinder(const std::array<double, 3>& p0,
                                                   const std::array<double, 3>& p1, double radius,
                                                   double pitch);
std::vector<std::array<double, 3>> sample_patch(const std::array<double, 3>& center,
                                                const std::array<double, 3>& normal, double side,
                                                double pitch);

}  // namespace pickpoint
