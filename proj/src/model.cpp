/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: src/model.cpp
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
#include "morphgen/model.hpp"

#include "morphgen/errors.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

namespace morphgen {

namespace {

constexpr char kMagic[4] = {'M', 'F', 'M', '1'};
constexpr std::uint64_t kToyModelStream = 0x6d6f64656cull; // "model"

void write_u32(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                           static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(bytes, 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void write_f32_array(std::ostream& out, const float* data, std::size_t n) {
    static_assert(sizeof(float) == 4);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t bits;
            std::memcpy(&bits, &data[i], 4);
            write_u32(out, bits);
        }
    }
}

void read_f32_array(std::istream& in, float* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * 4));
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint32_t bits = read_u32(in);
            std::memcpy(&data[i], &bits, 4);
        }
    }
}

void write_u32_array(std::ostream& out, const std::uint32_t* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
    } else {
        for (std::size_t i = 0; i < n; ++i) write_u32(out, data[i]);
    }
}

void read_u32_array(std::istream& in, std::uint32_t* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * 4));
    } else {
        for (std::size_t i = 0; i < n; ++i) data[i] = read_u32(in);
    }
}

std::int64_t header_count(const nlohmann::json& header, const char* key) {
    if (!header.contains(key) || !header[key].is_number_integer())
        raise(errc::dimension_mismatch, std::string("header missing integer field ") + key);
    const std::int64_t v = header[key].get<std::int64_t>();
    if (v < 0) raise(errc::dimension_mismatch, std::string("negative header field ") + key);
    return v;
}

} // namespace

void validate_model(const MorphableModel& m) {
    const std::int64_t v = m.vertex_count;
    const std::int64_t t = m.triangle_count;
    if (v < 3) raise(errc::invariant_violation, "vertex count must be at least 3");
    if (t < 1) raise(errc::invariant_violation, "triangle count must be at least 1");
    if (m.landmark_indices.empty()) raise(errc::invariant_violation, "at least one landmark required");
    if (m.shape_rank() < 1 || m.color_rank() < 1 || m.expr_rank() < 1)
        raise(errc::invariant_violation, "each basis needs at least one column");

    if (m.mean_shape.size() != 3 * v || m.mean_color.size() != 3 * v ||
        m.shape_basis.rows() != 3 * v || m.color_basis.rows() != 3 * v || m.expr_basis.rows() != 3 * v)
        raise(errc::invariant_violation, "array lengths do not match the vertex count");
    if (m.shape_sigma.size() != m.shape_rank() || m.color_sigma.size() != m.color_rank() ||
        m.expr_sigma.size() != m.expr_rank())
        raise(errc::invariant_violation, "sigma lengths do not match basis ranks");
    if (static_cast<std::int64_t>(m.triangles.size()) != t)
        raise(errc::invariant_violation, "triangle list length does not match the header");

    for (const auto& tri : m.triangles) {
        for (std::uint32_t idx : tri)
            if (idx >= static_cast<std::uint32_t>(v))
                raise(errc::invariant_violation, "triangle index out of range");
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            raise(errc::invariant_violation, "degenerate triangle with repeated vertex index");
    }
    for (std::uint32_t idx : m.landmark_indices)
        if (idx >= static_cast<std::uint32_t>(v))
            raise(errc::invariant_violation, "landmark index out of range");

    auto check_block = [](const Eigen::MatrixXf& basis, const Eigen::VectorXf& sigma, const char* name) {
        for (Eigen::Index k = 0; k < basis.cols(); ++k) {
            const double norm = basis.col(k).cast<double>().norm();
            if (std::abs(norm - 1.0) > 1e-4)
                raise(errc::invariant_violation, std::string(name) + " basis column is not unit norm");
        }
        for (Eigen::Index k = 0; k < sigma.size(); ++k)
            if (!(sigma[k] > 0.0f))
                raise(errc::invariant_violation, std::string(name) + " sigma must be positive");
    };
    check_block(m.shape_basis, m.shape_sigma, "shape");
    check_block(m.color_basis, m.color_sigma, "color");
    check_block(m.expr_basis, m.expr_sigma, "expression");

    for (Eigen::Index i = 0; i < m.mean_color.size(); ++i)
        if (!(m.mean_color[i] >= 0.0f && m.mean_color[i] <= 1.0f))
            raise(errc::invariant_violation, "mean color component outside [0, 1]");
}

MorphableModel load_model(const std::string& path) {
    if (!std::filesystem::exists(path)) raise(errc::missing_file, "no such file: " + path);
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io_failure, "cannot open " + path);
    const std::uint64_t file_size = std::filesystem::file_size(path);

    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        raise(errc::bad_magic, "not an MFM1 model file: " + path);

    const std::uint32_t header_len = read_u32(in);
    if (!in || 8ull + header_len > file_size)
        raise(errc::dimension_mismatch, "truncated header");
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), header_len);

    nlohmann::json header = nlohmann::json::parse(header_text, nullptr, false);
    if (header.is_discarded() || !header.is_object())
        raise(errc::dimension_mismatch, "header is not valid JSON");

    MorphableModel m;
    m.vertex_count = header_count(header, "V");
    m.triangle_count = header_count(header, "T");
    const std::int64_t ks = header_count(header, "Ks");
    const std::int64_t kc = header_count(header, "Kc");
    const std::int64_t ke = header_count(header, "Ke");
    const std::int64_t l = header_count(header, "L");
    const std::int64_t n3v = 3 * m.vertex_count;

    const std::uint64_t expected_payload =
        4ull * (static_cast<std::uint64_t>(n3v) * (2 + ks + kc + ke) + ks + kc + ke +
                3ull * m.triangle_count + l);
    const std::uint64_t payload_start = 8ull + header_len;
    if (file_size - payload_start != expected_payload)
        raise(errc::dimension_mismatch,
              "payload holds " + std::to_string(file_size - payload_start) + " bytes, header implies " +
                  std::to_string(expected_payload));

    m.mean_shape.resize(n3v);
    m.shape_basis.resize(n3v, ks);
    m.shape_sigma.resize(ks);
    m.mean_color.resize(n3v);
    m.color_basis.resize(n3v, kc);
    m.color_sigma.resize(kc);
    m.expr_basis.resize(n3v, ke);
    m.expr_sigma.resize(ke);

    read_f32_array(in, m.mean_shape.data(), m.mean_shape.size());
    read_f32_array(in, m.shape_basis.data(), static_cast<std::size_t>(n3v) * ks);
    read_f32_array(in, m.shape_sigma.data(), ks);
    read_f32_array(in, m.mean_color.data(), m.mean_color.size());
    read_f32_array(in, m.color_basis.data(), static_cast<std::size_t>(n3v) * kc);
    read_f32_array(in, m.color_sigma.data(), kc);
    read_f32_array(in, m.expr_basis.data(), static_cast<std::size_t>(n3v) * ke);
    read_f32_array(in, m.expr_sigma.data(), ke);

    m.triangles.resize(m.triangle_count);
    read_u32_array(in, m.triangles.empty() ? nullptr : m.triangles[0].data(),
                   3 * static_cast<std::size_t>(m.triangle_count));
    m.landmark_indices.resize(l);
    read_u32_array(in, m.landmark_indices.data(), l);

    if (!in) raise(errc::io_failure, "short read on " + path);
    validate_model(m);
    return m;
}

void save_model(const MorphableModel& m, const std::string& path) {
    validate_model(m);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::io_failure, "cannot write " + path);

    nlohmann::json header{{"V", m.vertex_count},   {"T", m.triangle_count}, {"Ks", m.shape_rank()},
                          {"Kc", m.color_rank()},  {"Ke", m.expr_rank()},   {"L", m.landmark_count()}};
    const std::string header_text = header.dump();

    out.write(kMagic, 4);
    write_u32(out, static_cast<std::uint32_t>(header_text.size()));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

    const std::int64_t n3v = 3 * m.vertex_count;
    write_f32_array(out, m.mean_shape.data(), m.mean_shape.size());
    write_f32_array(out, m.shape_basis.data(), static_cast<std::size_t>(n3v) * m.shape_rank());
    write_f32_array(out, m.shape_sigma.data(), m.shape_sigma.size());
    write_f32_array(out, m.mean_color.data(), m.mean_color.size());
    write_f32_array(out, m.color_basis.data(), static_cast<std::size_t>(n3v) * m.color_rank());
    write_f32_array(out, m.color_sigma.data(), m.color_sigma.size());
    write_f32_array(out, m.expr_basis.data(), static_cast<std::size_t>(n3v) * m.expr_rank());
    write_f32_array(out, m.expr_sigma.data(), m.expr_sigma.size());
    write_u32_array(out, m.triangles.empty() ? nullptr : m.triangles[0].data(),
                    3 * m.triangles.size());
    write_u32_array(out, m.landmark_indices.data(), m.landmark_indices.size());

    out.flush();
    if (!out) raise(errc::io_failure, "write failed on " + path);
}

void make_uv_sphere(int rings, Eigen::Matrix<double, Eigen::Dynamic, 3>& positions,
                    std::vector<std::array<std::uint32_t, 3>>& triangles) {
    if (rings < 3) raise(errc::bad_parameter, "uv sphere needs at least 3 rings");
    const int sectors = rings;
    const std::int64_t v = static_cast<std::int64_t>(rings - 1) * sectors + 2;
    positions.resize(v, 3);

    positions.row(0) = Eigen::RowVector3d(0, 0, 1);
    for (int i = 1; i < rings; ++i) {
        const double theta = std::numbers::pi * i / rings;
        const double st = std::sin(theta);
        const double ct = std::cos(theta);
        for (int j = 0; j < sectors; ++j) {
            const double phi = 2.0 * std::numbers::pi * j / sectors;
            positions.row(1 + static_cast<std::int64_t>(i - 1) * sectors + j) =
                Eigen::RowVector3d(st * std::cos(phi), st * std::sin(phi), ct);
        }
    }
    positions.row(v - 1) = Eigen::RowVector3d(0, 0, -1);

    triangles.clear();
    triangles.reserve(2 * static_cast<std::size_t>(rings) * (rings - 1));
    auto ring_at = [&](int i, int j) { return static_cast<std::uint32_t>(1 + (i - 1) * sectors + (j % sectors)); };
    for (int j = 0; j < sectors; ++j)
        triangles.push_back({0u, ring_at(1, j), ring_at(1, j + 1)});
    for (int i = 1; i < rings - 1; ++i) {
        for (int j = 0; j < sectors; ++j) {
            triangles.push_back({ring_at(i, j), ring_at(i + 1, j), ring_at(i + 1, j + 1)});
            triangles.push_back({ring_at(i, j), ring_at(i + 1, j + 1), ring_at(i, j + 1)});
        }
    }
    const auto bottom = static_cast<std::uint32_t>(v - 1);
    for (int j = 0; j < sectors; ++j)
        triangles.push_back({ring_at(rings - 1, j), bottom, ring_at(rings - 1, j + 1)});
}

namespace {

// Random Gaussian matrix with orthonormalized columns; sign-fixed so the
// largest-magnitude entry of each column is positive.
Eigen::MatrixXf random_orthonormal_basis(std::int64_t rows, std::int64_t cols, RandomStream& rng) {
    Eigen::MatrixXd raw(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) raw(r, c) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        Eigen::Index max_row = 0;
        q.col(c).cwiseAbs().maxCoeff(&max_row);
        if (q(max_row, c) < 0.0) q.col(c) = -q.col(c);
    }
    return q.cast<float>();
}

Eigen::VectorXf log_uniform_sigmas(std::int64_t n, double lo, double hi, RandomStream& rng) {
    Eigen::VectorXf s(n);
    for (Eigen::Index i = 0; i < n; ++i)
        s[i] = static_cast<float>(std::exp(rng.uniform(std::log(lo), std::log(hi))));
    return s;
}

std::vector<std::uint32_t> farthest_point_landmarks(
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions, std::int64_t count) {
    const std::int64_t v = positions.rows();
    std::vector<std::uint32_t> picked{0};
    std::vector<double> min_dist(v, std::numeric_limits<double>::infinity());
    while (static_cast<std::int64_t>(picked.size()) < count) {
        const auto last = positions.row(picked.back());
        std::int64_t best = -1;
        double best_dist = -1.0;
        for (std::int64_t i = 0; i < v; ++i) {
            min_dist[i] = std::min(min_dist[i], (positions.row(i) - last).norm());
            if (min_dist[i] > best_dist + 1e-15 &&
                std::find(picked.begin(), picked.end(), static_cast<std::uint32_t>(i)) == picked.end()) {
                best = i;
                best_dist = min_dist[i];
            }
        }
        picked.push_back(static_cast<std::uint32_t>(best));
    }
    return picked;
}

} // namespace

MorphableModel make_toy_model(int v_rings, int shape_rank, int color_rank, int expr_rank,
                              std::uint64_t seed) {
    if (v_rings < 4) raise(errc::bad_parameter, "v_rings must be at least 4");
    if (shape_rank < 1 || color_rank < 1 || expr_rank < 1)
        raise(errc::bad_parameter, "basis ranks must be at least 1");

    Eigen::Matrix<double, Eigen::Dynamic, 3> sphere;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    make_uv_sphere(v_rings, sphere, triangles);
    const std::int64_t v = sphere.rows();
    const std::int64_t n3v = 3 * v;
    if (shape_rank > n3v || color_rank > n3v || expr_rank > n3v)
        raise(errc::bad_parameter, "basis rank exceeds 3 * vertex count");

    // Face-like silhouette: ellipsoid scaling plus a smooth bump around the
    // +z pole standing in for the nose.
    Eigen::Matrix<double, Eigen::Dynamic, 3> mean_pos(v, 3);
    Eigen::VectorXf mean_color(n3v);
    for (std::int64_t i = 0; i < v; ++i) {
        const double zu = sphere(i, 2); // unit-sphere z before scaling
        double x = sphere(i, 0) * 1.0;
        double y = sphere(i, 1) * 1.3;
        double z = zu * 0.8;
        const double t = std::clamp((zu - 0.55) / 0.45, 0.0, 1.0);
        z += 0.3 * t * t;
        mean_pos.row(i) = Eigen::RowVector3d(x, y, z);

        mean_color[3 * i + 0] = static_cast<float>(0.78 + 0.06 * zu);
        mean_color[3 * i + 1] = static_cast<float>(0.62 + 0.05 * zu);
        mean_color[3 * i + 2] = static_cast<float>(0.54 + 0.04 * zu);
    }

    MorphableModel m;
    m.vertex_count = v;
    m.triangle_count = static_cast<std::int64_t>(triangles.size());
    m.triangles = std::move(triangles);

    m.mean_shape.resize(n3v);
    for (std::int64_t i = 0; i < v; ++i)
        for (int c = 0; c < 3; ++c) m.mean_shape[3 * i + c] = static_cast<float>(mean_pos(i, c));
    m.mean_color = std::move(mean_color);

    RandomStream rng(derive_seed(seed, {kToyModelStream}));
    m.shape_basis = random_orthonormal_basis(n3v, shape_rank, rng);
    m.shape_sigma = log_uniform_sigmas(shape_rank, 0.5, 5.0, rng);
    m.color_basis = random_orthonormal_basis(n3v, color_rank, rng);
    m.color_sigma = log_uniform_sigmas(color_rank, 0.5, 5.0, rng);
    m.expr_basis = random_orthonormal_basis(n3v, expr_rank, rng);
    m.expr_sigma = log_uniform_sigmas(expr_rank, 0.5, 5.0, rng);

    // 21 landmarks when the mesh has that many vertices (v_rings >= 5).
    m.landmark_indices = farthest_point_landmarks(mean_pos, std::min<std::int64_t>(21, v));

    validate_model(m);
    return m;
}

IdentityCoefficients sample_identity(const MorphableModel& model, RandomStream& rng) {
    IdentityCoefficients id;
    id.shape.resize(model.shape_rank());
    for (Eigen::Index i = 0; i < id.shape.size(); ++i) id.shape[i] = rng.normal();
    id.color.resize(model.color_rank());
    for (Eigen::Index i = 0; i < id.color.size(); ++i) id.color[i] = rng.normal();
    return id;
}

ExpressionCoefficients sample_expression(const MorphableModel& model, RandomStream& rng) {
    ExpressionCoefficients ex;
    ex.expr.resize(model.expr_rank());
    for (Eigen::Index i = 0; i < ex.expr.size(); ++i) ex.expr[i] = rng.normal();
    return ex;
}

FaceMesh synthesize_instance(const MorphableModel& model, const IdentityCoefficients& identity,
                             const ExpressionCoefficients& expression) {
    if (identity.shape.size() != model.shape_rank() || identity.color.size() != model.color_rank() ||
        expression.expr.size() != model.expr_rank())
        raise(errc::dimension_mismatch, "coefficient lengths do not match the model ranks");

    const std::int64_t v = model.vertex_count;
    const Eigen::VectorXd shape_scaled =
        identity.shape.cwiseProduct(model.shape_sigma.cast<double>());
    const Eigen::VectorXd expr_scaled = expression.expr.cwiseProduct(model.expr_sigma.cast<double>());
    const Eigen::VectorXd color_scaled =
        identity.color.cwiseProduct(model.color_sigma.cast<double>());

    Eigen::VectorXd pos_flat = model.mean_shape.cast<double>() +
                               model.shape_basis.cast<double>() * shape_scaled +
                               model.expr_basis.cast<double>() * expr_scaled;
    Eigen::VectorXd color_flat =
        model.mean_color.cast<double>() + model.color_basis.cast<double>() * color_scaled;
    color_flat = color_flat.cwiseMax(0.0).cwiseMin(1.0);

    FaceMesh mesh;
    mesh.positions = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(
        pos_flat.data(), v, 3);
    mesh.colors = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(
        color_flat.data(), v, 3);
    mesh.triangles = model.triangles;
    mesh.normals = compute_vertex_normals(mesh.positions, mesh.triangles);
    return mesh;
}

Eigen::Matrix<double, Eigen::Dynamic, 3>
compute_vertex_normals(const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions,
                       const std::vector<std::array<std::uint32_t, 3>>& triangles) {
    Eigen::Matrix<double, Eigen::Dynamic, 3> normals =
        Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(positions.rows(), 3);
    for (const auto& tri : triangles) {
        const Eigen::Vector3d p0 = positions.row(tri[0]);
        const Eigen::Vector3d e1 = positions.row(tri[1]).transpose() - p0;
        const Eigen::Vector3d e2 = positions.row(tri[2]).transpose() - p0;
        const Eigen::Vector3d face = e1.cross(e2); // magnitude = 2 * area
        normals.row(tri[0]) += face;
        normals.row(tri[1]) += face;
        normals.row(tri[2]) += face;
    }
    for (Eigen::Index i = 0; i < normals.rows(); ++i) {
        const double n = normals.row(i).norm();
        if (n < 1e-14)
            normals.row(i) = Eigen::RowVector3d(0, 0, 1);
        else
            normals.row(i) /= n;
    }
    return normals;
}

} // namespace morphgen
