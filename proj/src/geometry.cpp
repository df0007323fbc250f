// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include "pickpoint/geometry.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "pickpoint/error.hpp"

namespace pickpoint {

namespace {

Eigen::Matrix4d parts_to_matrix(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.block<3, 3>(0, 0) = r;
    m.block<3, 1>(0, 3) = t;
    return m;
}

}  // namespace

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m, double tol) {
    const Eigen::Matrix3d r = m.block<3, 3>(0, 0);
    const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    const double det = r.determinant();
    if (ortho > tol || std::abs(det - 1.0) > tol) {
        throw Error("invalid rigid transform: rotation block not orthonormal within tolerance");
    }
    if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) {
        throw Error("invalid rigid transform: bottom row must be (0, 0, 0, 1)");
    }
    return RigidTransform(m, Unchecked{});
}

RigidTransform RigidTransform::from_parts(const Eigen::Matrix3d& rotation,
                                          const Eigen::Vector3d& translation) {
    return from_matrix(parts_to_matrix(rotation, translation));
}

RigidTransform RigidTransform::rot_x(double radians) {
    Eigen::Matrix3d r;
    const double c = std::cos(radians), s = std::sin(radians);
    r << 1, 0, 0, 0, c, -s, 0, s, c;
    return RigidTransform(parts_to_matrix(r, Eigen::Vector3d::Zero()), Unchecked{});
}

RigidTransform RigidTransform::rot_y(double radians) {
    Eigen::Matrix3d r;
    const double c = std::cos(radians), s = std::sin(radians);
    r << c, 0, s, 0, 1, 0, -s, 0, c;
    return RigidTransform(parts_to_matrix(r, Eigen::Vector3d::Zero()), Unchecked{});
}

RigidTransform RigidTransform::rot_z(double radians) {
    Eigen::Matrix3d r;
    const double c = std::cos(radians), s = std::sin(radians);
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return RigidTransform(parts_to_matrix(r, Eigen::Vector3d::Zero()), Unchecked{});
}

RigidTransform RigidTransform::translate(const Eigen::Vector3d& t) {
    return RigidTransform(parts_to_matrix(Eigen::Matrix3d::Identity(), t), Unchecked{});
}

double RigidTransform::orthonormality_defect() const {
    const Eigen::Matrix3d r = rotation();
    return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

double RigidTransform::determinant_defect() const {
    return std::abs(rotation().determinant() - 1.0);
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    Eigen::Matrix4d m = a.mat_ * b.mat_;
    m.row(3) << 0, 0, 0, 1;
    return RigidTransform(m, RigidTransform::Unchecked{});
}

RigidTransform invert(const RigidTransform& t) {
    const Eigen::Matrix3d rt = t.rotation().transpose();
    return RigidTransform(parts_to_matrix(rt, -rt * t.translation()),
                          RigidTransform::Unchecked{});
}

Eigen::Vector3d apply_point(const RigidTransform& t, const Eigen::Vector3d& p) {
    return t.rotation() * p + t.translation();
}

ColoredPointCloud apply(const RigidTransform& t, const ColoredPointCloud& cloud) {
    ColoredPointCloud out;
    out.frame_label = cloud.frame_label;
    out.points.reserve(cloud.size());
    const Eigen::Matrix3d r = t.rotation();
    const Eigen::Vector3d tr = t.translation();
    for (const auto& p : cloud.points) {
        const Eigen::Vector3d q = r * Eigen::Vector3d(p.x, p.y, p.z) + tr;
        out.points.push_back({q.x(), q.y(), q.z(), p.r, p.g, p.b});
    }
    return out;
}

RigidTransform project_to_se3(const Eigen::Matrix4d& m) {
    const Eigen::Matrix3d block = m.block<3, 3>(0, 0);
    if (block.determinant() <= 0.0) {
        throw Error("degenerate rotation average");
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(block, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    const Eigen::Matrix3d v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) {
        u.col(2) *= -1.0;
    }
    return RigidTransform(parts_to_matrix(u * v.transpose(), m.block<3, 1>(0, 3)),
                          RigidTransform::Unchecked{});
}

double rotation_angle_deg(const RigidTransform& a, const RigidTransform& b) {
    const double chordal = (a.rotation() - b.rotation()).norm();
    // ||R1 - R2||_F = 2*sqrt(2)*sin(theta/2)
    const double s = std::clamp(chordal / (2.0 * std::sqrt(2.0)), 0.0, 1.0);
    return 2.0 * std::asin(s) * 180.0 / 3.14159265358979323846;
}

RigidTransform estimate_hand_eye(std::span<const CalibrationSample> samples,
                                 const RigidTransform& board_in_base) {
    if (samples.empty()) {
        throw Error("no calibration samples");
    }
    Eigen::Matrix4d sum = Eigen::Matrix4d::Zero();
    for (const auto& s : samples) {
        const RigidTransform chain =
            compose(compose(s.board_to_camera, board_in_base), s.flange_in_base);
        sum += invert(chain).matrix();
    }
    return project_to_se3(sum / static_cast<double>(samples.size()));
}

namespace {

using nlohmann::json;

json matrix_to_json(const RigidTransform& t) {
    json arr = json::array();
    const Eigen::Matrix4d& m = t.matrix();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) arr.push_back(m(r, c));
    return arr;
}

RigidTransform matrix_from_json(const json& arr, const std::string& what) {
    if (!arr.is_array() || arr.size() != 16) {
        throw Error(what + ": expected 16 row-major numbers");
    }
    Eigen::Matrix4d m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m(r, c) = arr[4 * r + c].get<double>();
    try {
        return RigidTransform::from_matrix(m);
    } catch (const Error& e) {
        throw Error(what + ": " + e.what());
    }
}

json parse_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error("invalid JSON in " + path.string());
    return j;
}

}  // namespace

CalibrationSet read_calibration_set(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    if (!j.contains("board_in_base")) {
        throw Error(path.string() + ": missing key board_in_base");
    }
    CalibrationSet set;
    set.board_in_base = matrix_from_json(j.at("board_in_base"), "board_in_base");
    for (const auto& e : j.value("samples", json::array())) {
        CalibrationSample s;
        s.pose_index = e.value("pose_index", 0);
        if (s.pose_index < 1) throw Error(path.string() + ": pose_index must be >= 1");
        s.board_to_camera = matrix_from_json(e.at("board_to_camera"), "board_to_camera");
        s.flange_in_base = matrix_from_json(e.at("flange_in_base"), "flange_in_base");
        set.samples.push_back(std::move(s));
    }
    return set;
}

void write_calibration_set(const CalibrationSet& set, const std::filesystem::path& path) {
    json j;
    j["board_in_base"] = matrix_to_json(set.board_in_base);
    j["samples"] = json::array();
    for (const auto& s : set.samples) {
        j["samples"].push_back({{"pose_index", s.pose_index},
                                {"board_to_camera", matrix_to_json(s.board_to_camera)},
                                {"flange_in_base", matrix_to_json(s.flange_in_base)}});
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

RigidTransform read_hand_eye(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    if (!j.contains("hand_eye")) throw Error(path.string() + ": missing key hand_eye");
    return matrix_from_json(j.at("hand_eye"), "hand_eye");
}

void write_hand_eye(const RigidTransform& t, const std::filesystem::path& path) {
    json j;
    j["hand_eye"] = matrix_to_json(t);
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace pickpoint
