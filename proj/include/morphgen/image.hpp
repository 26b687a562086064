/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: include/morphgen/image.hpp
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

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace morphgen {

/// 8-bit RGB raster. Pixel centers sit at integer coordinates, so pixel
/// (x, y) covers the continuous square [x-0.5, x+0.5) x [y-0.5, y+0.5).
struct Image8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; // 3 * width * height, row-major RGB

    Image8() = default;
    Image8(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* pixel(int x, int y) { return data.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
    const std::uint8_t* pixel(int x, int y) const {
        return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }

    bool contains(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    bool empty() const { return width <= 0 || height <= 0; }
};

Image8 load_png(const std::string& path);
void save_png(const Image8& image, const std::string& path);

/// Scales `texture` so it covers a width x height frame (aspect preserved,
/// bilinear) and crops the frame out of it. `offset_x/offset_y` shift the
/// crop window away from the center; shifts are clamped to the slack left
/// by the cover scaling, so (0, 0) is an exact center crop.
Image8 scale_to_cover(const Image8& texture, int width, int height, int offset_x = 0, int offset_y = 0);

Image8 flip_horizontal(const Image8& image);

/// Rotates the image content by `angle_deg` about `center`. Positive angles
/// turn +x toward +y (clockwise as displayed, y grows downward). Bilinear
/// resampling; pixels pulled from outside the frame stay black. A feature at
/// p lands at center + R(angle) * (p - center); landmarks must be moved with
/// the same forward map.
Image8 rotate_bilinear(const Image8& image, double center_x, double center_y, double angle_deg);

inline std::uint8_t quantize8(double c) {
    const double v = c < 0.0 ? 0.0 : (c > 1.0 ? 1.0 : c);
    return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

} // namespace morphgen
