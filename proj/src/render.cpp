/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: src/render.cpp
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
#include "morphgen/render.hpp"

#include "morphgen/errors.hpp"

#include <algorithm>
#include <cmath>

namespace morphgen {

namespace {

// Projection without the near-plane check; callers cull first. Shared by the
// rasterizer and landmark projection so both produce identical pixels.
inline Eigen::Vector2d project_unchecked(const Camera& camera, const Eigen::Vector3d& p) {
    const double inv_depth = 1.0 / -p.z();
    return {camera.focal_length * p.x() * inv_depth + camera.principal_x,
            camera.principal_y - camera.focal_length * p.y() * inv_depth};
}

inline double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double px, double py) {
    return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

// Top-left rule for positive-orientation triangles in y-down screen coords:
// a horizontal edge pointing +x is a top edge, an edge pointing -y is a left
// edge; only those own their boundary pixels.
inline bool edge_owns_boundary(const Eigen::Vector2d& from, const Eigen::Vector2d& to) {
    const double dx = to.x() - from.x();
    const double dy = to.y() - from.y();
    return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

} // namespace

bool pixel_in_triangle(double px, double py, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& c, Eigen::Vector3d& bary) {
    double area = orient2d(a, b, c.x(), c.y());
    if (area == 0.0) return false;

    const Eigen::Vector2d& v1 = area > 0.0 ? b : c;
    const Eigen::Vector2d& v2 = area > 0.0 ? c : b;
    if (area < 0.0) area = -area;

    const double w0 = orient2d(v1, v2, px, py);
    const double w1 = orient2d(v2, a, px, py);
    const double w2 = orient2d(a, v1, px, py);
    if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) return false;
    if (w0 == 0.0 && !edge_owns_boundary(v1, v2)) return false;
    if (w1 == 0.0 && !edge_owns_boundary(v2, a)) return false;
    if (w2 == 0.0 && !edge_owns_boundary(a, v1)) return false;

    const Eigen::Vector3d weights(w0 / area, w1 / area, w2 / area);
    bary = (&v1 == &b) ? weights : Eigen::Vector3d(weights.x(), weights.z(), weights.y());
    return true;
}

Framebuffer rasterize(const FaceMesh& mesh, const Pose& pose, const Camera& camera,
                      const Illumination& illum) {
    Framebuffer fb(camera.image_width, camera.image_height);
    const Eigen::Matrix3d rot = rotation_matrix(pose);

    const Eigen::Index v = mesh.positions.rows();
    Eigen::Matrix<double, Eigen::Dynamic, 3> cam_pos(v, 3);
    Eigen::Matrix<double, Eigen::Dynamic, 3> cam_normal(v, 3);
    cam_pos = (rot * mesh.positions.transpose()).transpose();
    cam_pos.rowwise() += pose.translation.transpose();
    cam_normal = (rot * mesh.normals.transpose()).transpose();

    std::vector<Eigen::Vector2d> screen(v);
    std::vector<bool> in_front(v);
    for (Eigen::Index i = 0; i < v; ++i) {
        in_front[i] = cam_pos(i, 2) < -camera.near_plane;
        screen[i] = in_front[i] ? project_unchecked(camera, cam_pos.row(i).transpose())
                                : Eigen::Vector2d::Zero();
    }

    for (const auto& tri : mesh.triangles) {
        if (!in_front[tri[0]] || !in_front[tri[1]] || !in_front[tri[2]]) continue;
        const Eigen::Vector2d& a = screen[tri[0]];
        const Eigen::Vector2d& b = screen[tri[1]];
        const Eigen::Vector2d& c = screen[tri[2]];

        // Front faces (outward normal toward the camera) project with
        // negative orientation in y-down screen coordinates.
        if (orient2d(a, b, c.x(), c.y()) >= 0.0) continue;

        const int min_x = std::max(0, static_cast<int>(std::ceil(std::min({a.x(), b.x(), c.x()}))));
        const int max_x = std::min(fb.width - 1,
                                   static_cast<int>(std::floor(std::max({a.x(), b.x(), c.x()}))));
        const int min_y = std::max(0, static_cast<int>(std::ceil(std::min({a.y(), b.y(), c.y()}))));
        const int max_y = std::min(fb.height - 1,
                                   static_cast<int>(std::floor(std::max({a.y(), b.y(), c.y()}))));

        const double inv_dist[3] = {1.0 / -cam_pos(tri[0], 2), 1.0 / -cam_pos(tri[1], 2),
                                    1.0 / -cam_pos(tri[2], 2)};

        for (int y = min_y; y <= max_y; ++y) {
            for (int x = min_x; x <= max_x; ++x) {
                Eigen::Vector3d bary;
                if (!pixel_in_triangle(static_cast<double>(x), static_cast<double>(y), a, b, c, bary))
                    continue;

                const double inv_w =
                    bary[0] * inv_dist[0] + bary[1] * inv_dist[1] + bary[2] * inv_dist[2];
                const double dist = 1.0 / inv_w;
                const std::size_t idx = fb.index(x, y);
                if (dist >= fb.depth[idx]) continue;

                // Perspective-correct interpolation of albedo and normal.
                Eigen::Vector3d albedo = Eigen::Vector3d::Zero();
                Eigen::Vector3d normal = Eigen::Vector3d::Zero();
                for (int k = 0; k < 3; ++k) {
                    const double w = bary[k] * inv_dist[k];
                    albedo += w * mesh.colors.row(tri[k]).transpose();
                    normal += w * cam_normal.row(tri[k]).transpose();
                }
                albedo *= dist;
                const double nlen = normal.norm();
                const Eigen::Vector3d unit_normal =
                    nlen < 1e-14 ? Eigen::Vector3d(0, 0, 1) : Eigen::Vector3d(normal / nlen);

                fb.color[idx] = shade(albedo, illum, unit_normal);
                fb.depth[idx] = dist;
                fb.coverage[idx] = 1;
            }
        }
    }
    return fb;
}

Image8 Framebuffer::to_image() const {
    Image8 image(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            if (!covered(x, y)) continue;
            const Eigen::Vector3d& c = color[index(x, y)];
            std::uint8_t* px = image.pixel(x, y);
            px[0] = quantize8(c.x());
            px[1] = quantize8(c.y());
            px[2] = quantize8(c.z());
        }
    return image;
}

Image8 composite_background(const Framebuffer& fb, const Image8& texture, int offset_x,
                            int offset_y) {
    Image8 out = scale_to_cover(texture, fb.width, fb.height, offset_x, offset_y);
    for (int y = 0; y < fb.height; ++y)
        for (int x = 0; x < fb.width; ++x) {
            if (!fb.covered(x, y)) continue;
            const Eigen::Vector3d& c = fb.color[fb.index(x, y)];
            std::uint8_t* px = out.pixel(x, y);
            px[0] = quantize8(c.x());
            px[1] = quantize8(c.y());
            px[2] = quantize8(c.z());
        }
    return out;
}

namespace {

// Bilinear z-buffer lookup at a subpixel position. Falls back to the
// best-weighted covered tap when the 2x2 neighborhood is partly empty;
// returns +inf when nothing around the sample is covered.
double sample_depth(const Framebuffer& fb, double u, double v) {
    const int x0 = static_cast<int>(std::floor(u));
    const int y0 = static_cast<int>(std::floor(v));
    const double fx = u - x0;
    const double fy = v - y0;

    double weighted = 0.0;
    double total_weight = 0.0;
    bool all_covered = true;
    double best_weight = -1.0;
    double best_depth = std::numeric_limits<double>::infinity();

    for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
            const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
            const int x = x0 + dx;
            const int y = y0 + dy;
            if (x < 0 || x >= fb.width || y < 0 || y >= fb.height || !fb.covered(x, y)) {
                all_covered = false;
                continue;
            }
            const double d = fb.depth[fb.index(x, y)];
            weighted += w * d;
            total_weight += w;
            if (w > best_weight) {
                best_weight = w;
                best_depth = d;
            }
        }

    if (all_covered) return weighted; // weights sum to 1
    if (total_weight > 0.0) return best_depth;
    return std::numeric_limits<double>::infinity();
}

} // namespace

std::vector<ProjectedLandmark> project_landmarks(const MorphableModel& model, const FaceMesh& mesh,
                                                 const Pose& pose, const Camera& camera,
                                                 const Framebuffer& fb) {
    const Eigen::Matrix3d rot = rotation_matrix(pose);
    std::vector<ProjectedLandmark> out;
    out.reserve(model.landmark_indices.size());

    constexpr double kDepthTolerance = 1e-3; // model units

    for (std::uint32_t idx : model.landmark_indices) {
        ProjectedLandmark lm;
        const Eigen::Vector3d p = rot * mesh.positions.row(idx).transpose() + pose.translation;
        lm.position = project_unchecked(camera, p);

        if (p.z() < -camera.near_plane) {
            const double dist = -p.z();
            const double buffer_dist = sample_depth(fb, lm.position.x(), lm.position.y());
            lm.visible = std::isfinite(buffer_dist) && std::abs(dist - buffer_dist) <= kDepthTolerance;
        }
        out.push_back(lm);
    }
    return out;
}

FaceBox face_box(const std::vector<ProjectedLandmark>& landmarks) {
    if (landmarks.empty()) raise(errc::empty_input, "face_box needs at least one landmark");
    FaceBox box{landmarks[0].position.x(), landmarks[0].position.y(), landmarks[0].position.x(),
                landmarks[0].position.y()};
    for (const auto& lm : landmarks) {
        box.x0 = std::min(box.x0, lm.position.x());
        box.y0 = std::min(box.y0, lm.position.y());
        box.x1 = std::max(box.x1, lm.position.x());
        box.y1 = std::max(box.y1, lm.position.y());
    }
    const double diag = box.diagonal();
    const double pad = diag > 0.0 ? 0.05 * diag : 1.0;
    box.x0 -= pad;
    box.y0 -= pad;
    box.x1 += pad;
    box.y1 += pad;
    return box;
}

} // namespace morphgen
