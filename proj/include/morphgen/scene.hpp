/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: include/morphgen/scene.hpp
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
#pragma once

#include "morphgen/model.hpp"
#include "morphgen/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <numbers>
#include <string>
#include <vector>

namespace morphgen {

/// Head pose: rotation angles in radians plus a camera-frame translation.
/// Frame convention: +x is the viewer's right, +y up, +z toward the camera;
/// the camera looks along -z, so visible geometry has negative z.
struct Pose {
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

struct AngleRange {
    double lo_deg = 0.0;
    double hi_deg = 0.0;
};

/// Closed sampling intervals for the pose angles, in degrees.
struct PoseRanges {
    AngleRange yaw{-90.0, 90.0};
    AngleRange pitch{-30.0, 30.0};
    AngleRange roll{-15.0, 15.0};
};

struct Camera {
    double focal_length = 128.0; // pixels
    double principal_x = 64.0;
    double principal_y = 64.0;
    int image_width = 128;
    int image_height = 128;
    double near_plane = 0.1; // model units

    static Camera for_frame(int width, int height) {
        Camera c;
        c.image_width = width;
        c.image_height = height;
        c.focal_length = static_cast<double>(std::min(width, height));
        c.principal_x = width / 2.0;
        c.principal_y = height / 2.0;
        return c;
    }
};

/// Spherical-harmonics environment light: 9 coefficients (bands 0-2) per
/// color channel, 27 values total.
struct Illumination {
    Eigen::Matrix<double, 3, 9> coeffs = Eigen::Matrix<double, 3, 9>::Zero();

    /// DC-only light that reproduces the albedo exactly under Lambertian
    /// shading (band-0 coefficient 1/Y00 on every channel).
    static Illumination identity_dc();
};

/// Empirical illumination distribution: a list of coefficient samples drawn
/// uniformly, mirroring an empirical prior estimated from photographs.
struct IlluminationPrior {
    std::vector<Illumination> samples;
};

/// R = Rz(roll) * Rx(pitch) * Ry(yaw); right-handed, det +1.
Eigen::Matrix3d rotation_matrix(const Pose& pose);

/// Pinhole projection of a camera-frame point (z < -near_plane required):
/// u = f*x/(-z) + cx, v = cy - f*y/(-z). Throws BehindCamera otherwise.
Eigen::Vector2d project_point(const Camera& camera, const Eigen::Vector3d& p);

/// Draws yaw/pitch/roll independently and uniformly over the closed ranges.
/// Translation is left at zero; auto_frame supplies it.
Pose sample_pose(const PoseRanges& ranges, RandomStream& rng);

/// Translation that centers the rotated mesh's bounding sphere on the
/// principal point with its projected silhouette diameter equal to
/// fill * min(image_width, image_height).
Eigen::Vector3d auto_frame(const FaceMesh& mesh, const Eigen::Matrix3d& rotation,
                           const Camera& camera, double fill = 0.7);

/// Real spherical harmonics bands 0-2 at a unit direction, ordered
/// Y00, Y1-1, Y10, Y11, Y2-2, Y2-1, Y20, Y21, Y22.
std::array<double, 9> sh_basis(const Eigen::Vector3d& n);

/// Per-channel irradiance E_c(n) = sum_k A(k) * coeffs(c,k) * Y_k(n) with
/// the clamped-cosine band factors A0 = pi, A1 = 2pi/3, A2 = pi/4.
Eigen::Vector3d sh_irradiance(const Illumination& illum, const Eigen::Vector3d& n);

/// Lambertian pixel value: clamp01(albedo * E(n) / pi), per channel.
Eigen::Vector3d shade(const Eigen::Vector3d& albedo, const Illumination& illum,
                      const Eigen::Vector3d& n);

/// Prior file: UTF-8 JSON {"samples": [[27 numbers], ...]}.
IlluminationPrior load_illumination_prior(const std::string& path);

Illumination sample_illumination(const IlluminationPrior& prior, RandomStream& rng);

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

} // namespace morphgen
