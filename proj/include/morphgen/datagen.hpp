/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: include/morphgen/datagen.hpp
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

#include "morphgen/image.hpp"
#include "morphgen/model.hpp"
#include "morphgen/render.hpp"
#include "morphgen/scene.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace morphgen {

/// Declarative description of a dataset run. Everything an image depends on
/// is derived from (spec, identity_id, sample_idx), so runs are reproducible
/// and order-independent.
struct DatasetSpec {
    std::int64_t num_identities = 1;
    std::int64_t samples_per_identity = 1;
    PoseRanges pose_ranges;
    bool expression_enabled = true;
    std::string illumination_prior_path;
    std::string background_dir;
    std::uint64_t seed = 0;
    int frame_width = 128;
    int frame_height = 128;
    double fill = 0.7;
};

/// Built-in spec presets:
///   recognition-desk   200 identities x 10 samples
///   landmarks-desk     400 identities x 5 samples
///   recognition-paper  20000 identities x 100 samples
///   landmarks-paper    20000 identities x 5 samples
std::optional<DatasetSpec> preset_spec(const std::string& name);

nlohmann::json spec_to_json(const DatasetSpec& spec);

/// FNV-1a hash of the canonical spec JSON, 16 hex digits. Stamped into every
/// manifest record so downstream tools can tie records to their spec.
std::string spec_hash(const DatasetSpec& spec);

/// One manifest line. `extra` carries unknown keys so foreign manifests
/// round-trip through read/write untouched.
struct ManifestRecord {
    std::string image_path;
    std::int64_t identity_id = 0;
    std::int64_t sample_idx = 0;
    double yaw_deg = 0.0;
    double pitch_deg = 0.0;
    double roll_deg = 0.0;
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    Eigen::Matrix<double, 3, 9> illumination = Eigen::Matrix<double, 3, 9>::Zero();
    std::vector<ProjectedLandmark> landmarks;
    FaceBox face_box;
    std::string background_id;
    std::string spec_hash;
    nlohmann::json extra = nlohmann::json::object();
};

using Manifest = std::vector<ManifestRecord>;

/// Renders the full N x M grid into out_dir/images/ and writes
/// out_dir/manifest.jsonl. Identity coefficients are drawn once per identity
/// and reused across its samples; expression, pose, illumination and
/// background are redrawn per image from a seed derived as
/// hash(seed, identity_id, sample_idx). `jobs` > 1 renders records in
/// parallel without changing any output byte.
Manifest generate_dataset(const DatasetSpec& spec, const MorphableModel& model,
                          const std::string& out_dir, int jobs = 1);

/// The identity stream used by generate_dataset, exposed so callers can
/// re-synthesize the exact geometry of a recorded identity.
IdentityCoefficients identity_coefficients_for(const MorphableModel& model, std::uint64_t seed,
                                               std::int64_t identity_id);

/// Yaw range squeezed to [-35, 35] degrees; everything else untouched.
DatasetSpec frontal_bias_spec(const DatasetSpec& spec);

/// Halves the identity count and doubles samples per identity, preserving
/// the total record count. Requires an even identity count of at least 2.
DatasetSpec half_identity_spec(const DatasetSpec& spec);

Manifest read_manifest(const std::string& path);
void write_manifest(const Manifest& records, const std::string& path);

nlohmann::json record_to_json(const ManifestRecord& record);
ManifestRecord record_from_json(const nlohmann::json& object);

/// Horizontal mirror: image flipped, landmark x -> width-1-x, and the given
/// left/right index pairs swapped. `flip_pairs` must pair each index at most
/// once and never with itself.
std::pair<Image8, std::vector<Eigen::Vector2d>>
augment_mirror(const Image8& image, const std::vector<Eigen::Vector2d>& landmarks,
               const std::vector<std::pair<int, int>>& flip_pairs);

/// Rotation by a fixed angle about the face-box center; landmarks follow the
/// same rigid map. augment_rotate draws the angle uniformly in [-30, 30].
std::pair<Image8, std::vector<Eigen::Vector2d>>
rotate_about_box(const Image8& image, const std::vector<Eigen::Vector2d>& landmarks,
                 const FaceBox& box, double angle_deg);

std::pair<Image8, std::vector<Eigen::Vector2d>>
augment_rotate(const Image8& image, const std::vector<Eigen::Vector2d>& landmarks,
               const FaceBox& box, RandomStream& rng);

} // namespace morphgen
