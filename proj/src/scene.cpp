/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: src/scene.cpp
 *
 * Copyright 2026 The Morphgen Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "morphgen/scene.hpp"

#include "morphgen/errors.hpp"

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

namespace morphgen {

namespace {

// Band-0..2 basis constants of the real spherical harmonics.
constexpr double kY00 = 0.282095;
constexpr double kY1 = 0.488603;
constexpr double kY2od = 1.092548; // off-diagonal band-2 (xy, yz, xz)
constexpr double kY20 = 0.315392;
constexpr double kY22 = 0.546274;

// Clamped-cosine convolution factors per band.
constexpr double kA0 = std::numbers::pi;
constexpr double kA1 = 2.0 * std::numbers::pi / 3.0;
constexpr double kA2 = std::numbers::pi / 4.0;

} // namespace

Illumination Illumination::identity_dc() {
    Illumination illum;
    illum.coeffs.col(0).setConstant(1.0 / kY00);
    return illum;
}

Eigen::Matrix3d rotation_matrix(const Pose& pose) {
    return (Eigen::AngleAxisd(pose.roll, Eigen::Vector3d::UnitZ()) *
            Eigen::AngleAxisd(pose.pitch, Eigen::Vector3d::UnitX()) *
            Eigen::AngleAxisd(pose.yaw, Eigen::Vector3d::UnitY()))
        .toRotationMatrix();
}

Eigen::Vector2d project_point(const Camera& camera, const Eigen::Vector3d& p) {
    if (p.z() >= -camera.near_plane)
        raise(errc::behind_camera, "point is behind the near plane (z = " + std::to_string(p.z()) + ")");
    const double inv_depth = 1.0 / -p.z();
    return {camera.focal_length * p.x() * inv_depth + camera.principal_x,
            camera.principal_y - camera.focal_length * p.y() * inv_depth};
}

Pose sample_pose(const PoseRanges& ranges, RandomStream& rng) {
    auto check = [](const AngleRange& r, const char* name) {
        if (!(r.lo_deg <= r.hi_deg))
            raise(errc::bad_parameter, std::string(name) + " range has lo > hi");
    };
    check(ranges.yaw, "yaw");
    check(ranges.pitch, "pitch");
    check(ranges.roll, "roll");

    Pose pose;
    pose.yaw = deg_to_rad(rng.uniform(ranges.yaw.lo_deg, ranges.yaw.hi_deg));
    pose.pitch = deg_to_rad(rng.uniform(ranges.pitch.lo_deg, ranges.pitch.hi_deg));
    pose.roll = deg_to_rad(rng.uniform(ranges.roll.lo_deg, ranges.roll.hi_deg));
    return pose;
}

Eigen::Vector3d auto_frame(const FaceMesh& mesh, const Eigen::Matrix3d& rotation,
                           const Camera& camera, double fill) {
    if (!(fill > 0.0 && fill <= 1.0)) raise(errc::bad_parameter, "fill must be in (0, 1]");
    if (mesh.positions.rows() == 0) raise(errc::degenerate_mesh, "mesh has no vertices");

    // Bounding sphere of the rotated mesh: AABB center, max-distance radius.
    const Eigen::Matrix<double, Eigen::Dynamic, 3> rotated =
        (rotation * mesh.positions.transpose()).transpose();
    const Eigen::RowVector3d lo = rotated.colwise().minCoeff();
    const Eigen::RowVector3d hi = rotated.colwise().maxCoeff();
    const Eigen::RowVector3d center = 0.5 * (lo + hi);
    const double radius = (rotated.rowwise() - center).rowwise().norm().maxCoeff();
    if (radius <= 0.0) raise(errc::degenerate_mesh, "mesh bounding sphere has zero radius");

    // Exact sphere silhouette: apparent radius f * tan(asin(r / d)) equals
    // fill * min(w, h) / 2 at distance d = r / sin(atan(target / f)).
    const double target_radius_px = 0.5 * fill * std::min(camera.image_width, camera.image_height);
    const double depth = radius / std::sin(std::atan(target_radius_px / camera.focal_length));
    return Eigen::Vector3d(0.0, 0.0, -depth) - center.transpose();
}

std::array<double, 9> sh_basis(const Eigen::Vector3d& n) {
    if (std::abs(n.norm() - 1.0) > 1e-6)
        raise(errc::not_unit, "sh_basis requires a unit direction");
    const double x = n.x(), y = n.y(), z = n.z();
    return {kY00,          kY1 * y,       kY1 * z,
            kY1 * x,       kY2od * x * y, kY2od * y * z,
            kY20 * (3.0 * z * z - 1.0),   kY2od * x * z,
            kY22 * (x * x - y * y)};
}

Eigen::Vector3d sh_irradiance(const Illumination& illum, const Eigen::Vector3d& n) {
    const auto basis = sh_basis(n);
    Eigen::Matrix<double, 9, 1> weighted;
    weighted << kA0 * basis[0], kA1 * basis[1], kA1 * basis[2], kA1 * basis[3], kA2 * basis[4],
        kA2 * basis[5], kA2 * basis[6], kA2 * basis[7], kA2 * basis[8];
    return illum.coeffs * weighted;
}

Eigen::Vector3d shade(const Eigen::Vector3d& albedo, const Illumination& illum,
                      const Eigen::Vector3d& n) {
    const Eigen::Vector3d e = sh_irradiance(illum, n) / std::numbers::pi;
    return albedo.cwiseProduct(e).cwiseMax(0.0).cwiseMin(1.0);
}

IlluminationPrior load_illumination_prior(const std::string& path) {
    if (!std::filesystem::exists(path)) raise(errc::missing_file, "no such file: " + path);
    std::ifstream in(path);
    if (!in) raise(errc::io_failure, "cannot open " + path);

    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("samples") ||
        !doc["samples"].is_array())
        raise(errc::bad_record, "prior file must be a JSON object with a \"samples\" array");

    IlluminationPrior prior;
    std::size_t row = 0;
    for (const auto& entry : doc["samples"]) {
        ++row;
        if (!entry.is_array() || entry.size() != 27)
            raise(errc::bad_record,
                  "prior sample " + std::to_string(row) + " must hold exactly 27 numbers");
        Illumination illum;
        for (int i = 0; i < 27; ++i) {
            if (!entry[i].is_number())
                raise(errc::bad_record, "prior sample " + std::to_string(row) + " holds a non-number");
            // Row-major per channel: 9 red, 9 green, 9 blue.
            illum.coeffs(i / 9, i % 9) = entry[i].get<double>();
        }
        if (!illum.coeffs.allFinite())
            raise(errc::bad_record, "prior sample " + std::to_string(row) + " holds a non-finite value");
        prior.samples.push_back(illum);
    }
    if (prior.samples.empty()) raise(errc::empty_prior, "prior holds no samples");
    return prior;
}

Illumination sample_illumination(const IlluminationPrior& prior, RandomStream& rng) {
    if (prior.samples.empty()) raise(errc::empty_prior, "prior holds no samples");
    return prior.samples[rng.uniform_index(prior.samples.size())];
}

} // namespace morphgen
