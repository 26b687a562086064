/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: include/morphgen/model.hpp
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

#include "morphgen/rng.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace morphgen {

/**
 * @brief PCA statistics of a morphable face model: mean/basis/sigma triples
 * for shape, per-vertex albedo color and expression, plus the shared mesh
 * topology and the landmark vertex set.
 *
 * Shape units are model units (millimeters for scan-derived data); colors
 * are linear RGB in [0, 1]. Basis matrices have unit-norm columns and are
 * stored column-major. Instances are immutable after construction and safe
 * to share across threads.
 */
struct MorphableModel {
    std::int64_t vertex_count = 0;   // V
    std::int64_t triangle_count = 0; // T

    Eigen::VectorXf mean_shape;  // 3V
    Eigen::MatrixXf shape_basis; // 3V x Ks
    Eigen::VectorXf shape_sigma; // Ks

    Eigen::VectorXf mean_color;  // 3V
    Eigen::MatrixXf color_basis; // 3V x Kc
    Eigen::VectorXf color_sigma; // Kc

    Eigen::MatrixXf expr_basis; // 3V x Ke
    Eigen::VectorXf expr_sigma; // Ke

    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::vector<std::uint32_t> landmark_indices;

    std::int64_t shape_rank() const { return shape_basis.cols(); }
    std::int64_t color_rank() const { return color_basis.cols(); }
    std::int64_t expr_rank() const { return expr_basis.cols(); }
    std::int64_t landmark_count() const { return static_cast<std::int64_t>(landmark_indices.size()); }
};

/// Identity coefficients in standard-deviation units; scaling by the model
/// sigmas happens at synthesis time.
struct IdentityCoefficients {
    Eigen::VectorXd shape; // Ks
    Eigen::VectorXd color; // Kc
};

struct ExpressionCoefficients {
    Eigen::VectorXd expr; // Ke
};

/// One synthesized model instance, ready for posing and shading.
struct FaceMesh {
    Eigen::Matrix<double, Eigen::Dynamic, 3> positions; // V x 3
    Eigen::Matrix<double, Eigen::Dynamic, 3> colors;    // V x 3, in [0, 1]
    Eigen::Matrix<double, Eigen::Dynamic, 3> normals;   // V x 3, unit rows
    std::vector<std::array<std::uint32_t, 3>> triangles;
};

/// Reads a model from the binary "MFM1" container. Throws MissingFile,
/// BadMagic, DimensionMismatch or InvariantViolation.
MorphableModel load_model(const std::string& path);

/// Writes the binary container so that load_model round-trips bit-exactly.
void save_model(const MorphableModel& model, const std::string& path);

/// Validates the MorphableModel invariants (index ranges, basis column
/// norms within 1e-4 of 1, positive sigmas). Throws InvariantViolation.
void validate_model(const MorphableModel& model);

/// Fabricates a deterministic procedural model for licensed-data-free runs:
/// a UV sphere flattened into a face-like ellipsoid (x, y, z scales 1.0,
/// 1.3, 0.8) with a nose bump around the +z pole, random orthonormalized
/// bases, log-uniform sigmas in [0.5, 5.0] and 21 farthest-point landmarks.
MorphableModel make_toy_model(int v_rings, int shape_rank, int color_rank, int expr_rank,
                              std::uint64_t seed);

/// Unit UV sphere with `rings` stacks and sectors, triangles wound with
/// outward normals. V = rings*(rings-1) + 2, T = 2*rings*(rings-1).
void make_uv_sphere(int rings, Eigen::Matrix<double, Eigen::Dynamic, 3>& positions,
                    std::vector<std::array<std::uint32_t, 3>>& triangles);

/// Draws i.i.d. standard-normal coefficients for shape and color.
IdentityCoefficients sample_identity(const MorphableModel& model, RandomStream& rng);

ExpressionCoefficients sample_expression(const MorphableModel& model, RandomStream& rng);

/// positions = mean + shape_basis * (shape .* sigma) + expr_basis * (expr .* sigma);
/// colors = clamp01(mean + color_basis * (color .* sigma)); normals recomputed.
FaceMesh synthesize_instance(const MorphableModel& model, const IdentityCoefficients& identity,
                             const ExpressionCoefficients& expression);

/// Area-weighted vertex normals (incident face normals summed with weights
/// proportional to triangle area). Vertices with a zero sum get (0, 0, 1).
Eigen::Matrix<double, Eigen::Dynamic, 3>
compute_vertex_normals(const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions,
                       const std::vector<std::array<std::uint32_t, 3>>& triangles);

} // namespace morphgen
