// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <vector>

#include "pickpoint/point_cloud.hpp"

namespace pickpoint {

/// SE(3) element stored as a 4x4 homogeneous matrix, column-vector
/// convention (world = T * local). Rotation block orthonormal within 1e-9
/// with det +1; bottom row exactly (0,0,0,1).
class RigidTransform {
public:
    RigidTransform() : mat_(Eigen::Matrix4d::Identity()) {}

    /// Validates the SE(3) invariants; throws Error when violated.
    static RigidTransform from_matrix(const Eigen::Matrix4d& m, double tol = 1e-9);

    static RigidTransform from_parts(const Eigen::Matrix3d& rotation,
                                     const Eigen::Vector3d& translation);
    static RigidTransform identity() { return RigidTransform(); }
    static RigidTransform rot_x(double radians);
    static RigidTransform rot_y(double radians);
    static RigidTransform rot_z(double radians);
    static RigidTransform translate(const Eigen::Vector3d& t);

    const Eigen::Matrix4d& matrix() const { return mat_; }
    Eigen::Matrix3d rotation() const { return mat_.block<3, 3>(0, 0); }
    Eigen::Vector3d translation() const { return mat_.block<3, 1>(0, 3); }

    /// Max-norm orthonormality defect and determinant defect of the
    /// rotation block; both must stay within 1e-9.
    double orthonormality_defect() const;
    double determinant_defect() const;

private:
    friend RigidTransform compose(const RigidTransform&, const RigidTransform&);
    friend RigidTransform invert(const RigidTransform&);
    friend RigidTransform project_to_se3(const Eigen::Matrix4d&);
    struct Unchecked {};
    RigidTransform(const Eigen::Matrix4d& m, Unchecked) : mat_(m) {}

    Eigen::Matrix4d mat_;
};

/// a then b applied right-to-left: result maps p to a * (b * p).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Closed-form inverse [R^T, -R^T p].
RigidTransform invert(const RigidTransform& t);

Eigen::Vector3d apply_point(const RigidTransform& t, const Eigen::Vector3d& p);

/// Transforms every position; colors and order preserved.
ColoredPointCloud apply(const RigidTransform& t, const ColoredPointCloud& cloud);

/// Projects an arbitrary 4x4 matrix to the nearest SE(3) element: rotation
/// block replaced by its orthogonal Procrustes projection (SVD, det forced
/// +1), translation copied, bottom row normalized. Throws
/// "degenerate rotation average" when det of the 3x3 block is <= 0.
RigidTransform project_to_se3(const Eigen::Matrix4d& m);

/// Relative rotation angle in degrees, computed through the chordal
/// distance ||R1 - R2||_F (smooth, no branch cuts).
double rotation_angle_deg(const RigidTransform& a, const RigidTransform& b);

struct CalibrationSample {
    int pose_index = 1;                // >= 1
    RigidTransform board_to_camera;    // measured board pose in camera frame
    RigidTransform flange_in_base;     // flange pose from forward kinematics
};

/// Closed-loop hand-eye estimate: the arithmetic mean of
/// (board_to_camera(i) * board_in_base * flange_in_base(i))^-1 over all
/// samples, projected back onto SE(3). `board_in_base` is the fixed
/// base-to-board transform shared by all samples.
RigidTransform estimate_hand_eye(std::span<const CalibrationSample> samples,
                                 const RigidTransform& board_in_base);

struct CalibrationSet {
    RigidTransform board_in_base;
    std::vector<CalibrationSample> samples;
};

/// JSON schema: {"board_in_base": [16 row-major], "samples":
/// [{"pose_index": n, "board_to_camera": [16], "flange_in_base": [16]}]}.
CalibrationSet read_calibration_set(const std::filesystem::path& path);
void write_calibration_set(const CalibrationSet& set, const std::filesystem::path& path);

/// Single-transform file: {"hand_eye": [16 row-major]}.
RigidTransform read_hand_eye(const std::filesystem::path& path);
void write_hand_eye(const RigidTransform& t, const std::filesystem::path& path);

}  // namespace pickpoint
