/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: include/morphgen/render.hpp
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
#include "morphgen/scene.hpp"

#include <Eigen/Core>

#include <limits>
#include <vector>

namespace morphgen {

/// Render target with real-valued color, a depth buffer holding distance to
/// the camera (+inf where empty) and a hard coverage mask.
struct Framebuffer {
    int width = 0;
    int height = 0;
    std::vector<Eigen::Vector3d> color;
    std::vector<double> depth;
    std::vector<std::uint8_t> coverage;

    Framebuffer() = default;
    Framebuffer(int w, int h)
        : width(w), height(h), color(static_cast<std::size_t>(w) * h, Eigen::Vector3d::Zero()),
          depth(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity()),
          coverage(static_cast<std::size_t>(w) * h, 0) {}

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    bool covered(int x, int y) const { return coverage[index(x, y)] != 0; }

    /// Quantizes the shaded colors to 8-bit RGB; uncovered pixels are black.
    Image8 to_image() const;
};

struct ProjectedLandmark {
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    bool visible = false;
};

struct FaceBox {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double diagonal() const { return std::hypot(x1 - x0, y1 - y0); }
};

/// Per-image ground truth attached to a rendered sample.
struct Annotation {
    std::vector<ProjectedLandmark> landmarks;
    FaceBox face_box;
    Pose pose;
    Illumination illumination;
    std::int64_t identity_id = 0;
    std::string background_id;
};

/// Rasterizes the posed mesh with perspective-correct attribute
/// interpolation, a nearest-distance z-buffer and back-face culling.
/// Triangles with any vertex behind the near plane are culled whole.
Framebuffer rasterize(const FaceMesh& mesh, const Pose& pose, const Camera& camera,
                      const Illumination& illum);

/// Pixel-inclusion predicate shared with the occlusion oracle: half-space
/// test with a top-left fill rule against the three projected vertices
/// (screen coords, y down). Returns barycentric weights when inside.
bool pixel_in_triangle(double px, double py, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& c, Eigen::Vector3d& bary);

/// Hard-mask composite: covered pixels keep the face render, uncovered ones
/// take the scaled-to-cover, cropped background texture.
Image8 composite_background(const Framebuffer& fb, const Image8& texture, int offset_x = 0,
                            int offset_y = 0);

/// Projects the model's landmark vertices through the posed camera. Points
/// behind the near plane keep their (unclamped) formula coordinates but are
/// flagged invisible. Visibility compares the vertex distance against the
/// z-buffer sampled bilinearly at the subpixel position, tolerance 1e-3
/// model units.
std::vector<ProjectedLandmark> project_landmarks(const MorphableModel& model, const FaceMesh& mesh,
                                                 const Pose& pose, const Camera& camera,
                                                 const Framebuffer& fb);

/// Axis-aligned bounding box of all landmarks (visibility ignored), grown by
/// 5% of its diagonal on each side; a zero-diagonal box grows by 1 px.
FaceBox face_box(const std::vector<ProjectedLandmark>& landmarks);

} // namespace morphgen
