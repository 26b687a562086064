/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: src/image.cpp
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
#include "morphgen/image.hpp"

#include "morphgen/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <numbers>

namespace morphgen {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

Image8 load_png(const std::string& path) {
    if (!std::filesystem::exists(path)) raise(errc::missing_file, "no such file: " + path);
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) raise(errc::io_failure, "cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) raise(errc::io_failure, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        raise(errc::io_failure, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(errc::bad_record, "not a valid PNG: " + path);
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    // Normalize everything to 8-bit RGB.
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    Image8 image(static_cast<int>(png_get_image_width(png, info)),
                 static_cast<int>(png_get_image_height(png, info)));
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y) rows[y] = image.pixel(0, y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

void save_png(const Image8& image, const std::string& path) {
    if (image.empty()) raise(errc::bad_parameter, "cannot save an empty image");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) raise(errc::io_failure, "cannot write " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) raise(errc::io_failure, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        raise(errc::io_failure, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(errc::io_failure, "png write failed: " + path);
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y)
        rows[y] = const_cast<png_bytep>(image.pixel(0, y));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

namespace {

// Bilinear tap at continuous source coordinates (pixel centers at integers).
// Out-of-range taps clamp to the border.
std::array<double, 3> sample_bilinear_clamped(const Image8& src, double x, double y) {
    const double cx = std::clamp(x, 0.0, static_cast<double>(src.width - 1));
    const double cy = std::clamp(y, 0.0, static_cast<double>(src.height - 1));
    const int x0 = static_cast<int>(std::floor(cx));
    const int y0 = static_cast<int>(std::floor(cy));
    const int x1 = std::min(x0 + 1, src.width - 1);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double fx = cx - x0;
    const double fy = cy - y0;
    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) {
        const double top = src.pixel(x0, y0)[c] * (1.0 - fx) + src.pixel(x1, y0)[c] * fx;
        const double bot = src.pixel(x0, y1)[c] * (1.0 - fx) + src.pixel(x1, y1)[c] * fx;
        out[c] = top * (1.0 - fy) + bot * fy;
    }
    return out;
}

} // namespace

Image8 scale_to_cover(const Image8& texture, int width, int height, int offset_x, int offset_y) {
    if (texture.empty()) raise(errc::empty_texture, "background texture is empty");
    if (width <= 0 || height <= 0) raise(errc::bad_parameter, "frame dimensions must be positive");

    const double scale = std::max(static_cast<double>(width) / texture.width,
                                  static_cast<double>(height) / texture.height);
    const double scaled_w = texture.width * scale;
    const double scaled_h = texture.height * scale;

    // Crop window origin in scaled coordinates; offsets clamp to the slack.
    const double slack_x = scaled_w - width;
    const double slack_y = scaled_h - height;
    const double origin_x = std::clamp(slack_x / 2.0 + offset_x, 0.0, slack_x);
    const double origin_y = std::clamp(slack_y / 2.0 + offset_y, 0.0, slack_y);

    Image8 out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double sx = (origin_x + x) / scale;
            const double sy = (origin_y + y) / scale;
            const auto rgb = sample_bilinear_clamped(texture, sx, sy);
            std::uint8_t* px = out.pixel(x, y);
            for (int c = 0; c < 3; ++c) px[c] = static_cast<std::uint8_t>(std::lround(rgb[c]));
        }
    }
    return out;
}

Image8 flip_horizontal(const Image8& image) {
    Image8 out(image.width, image.height);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            const std::uint8_t* src = image.pixel(image.width - 1 - x, y);
            std::uint8_t* dst = out.pixel(x, y);
            dst[0] = src[0];
            dst[1] = src[1];
            dst[2] = src[2];
        }
    return out;
}

Image8 rotate_bilinear(const Image8& image, double center_x, double center_y, double angle_deg) {
    const double a = angle_deg * std::numbers::pi / 180.0;
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    Image8 out(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            // Inverse map: rotate the destination pixel back into the source.
            const double dx = x - center_x;
            const double dy = y - center_y;
            const double sx = center_x + ca * dx + sa * dy;
            const double sy = center_y - sa * dx + ca * dy;
            if (sx < -0.5 || sx > image.width - 0.5 || sy < -0.5 || sy > image.height - 0.5)
                continue; // stays black
            const auto rgb = sample_bilinear_clamped(image, sx, sy);
            std::uint8_t* px = out.pixel(x, y);
            for (int c = 0; c < 3; ++c) px[c] = static_cast<std::uint8_t>(std::lround(rgb[c]));
        }
    }
    return out;
}

} // namespace morphgen
