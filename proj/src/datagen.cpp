/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: src/datagen.cpp
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
#include "morphgen/datagen.hpp"

#include "morphgen/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace morphgen {

namespace fs = std::filesystem;

namespace {

// Stream tags feeding derive_seed; identities and images never share a seed.
constexpr std::uint64_t kIdentityStream = 0x6964656e74ull; // "ident"
constexpr std::uint64_t kImageStream = 0x696d616765ull;    // "image"

void validate_spec(const DatasetSpec& spec) {
    if (spec.num_identities < 1 || spec.samples_per_identity < 1)
        raise(errc::bad_parameter, "identity and sample counts must be at least 1");
    auto check = [](const AngleRange& r, const char* name) {
        if (!(r.lo_deg <= r.hi_deg))
            raise(errc::bad_parameter, std::string(name) + " range has lo > hi");
    };
    check(spec.pose_ranges.yaw, "yaw");
    check(spec.pose_ranges.pitch, "pitch");
    check(spec.pose_ranges.roll, "roll");
    if (spec.frame_width < 1 || spec.frame_height < 1)
        raise(errc::bad_parameter, "frame dimensions must be positive");
    if (!(spec.fill > 0.0 && spec.fill <= 1.0)) raise(errc::bad_parameter, "fill must be in (0, 1]");
}

std::vector<std::string> list_backgrounds(const std::string& dir) {
    if (!fs::is_directory(dir)) raise(errc::missing_file, "background directory not found: " + dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png") names.push_back(entry.path().filename().string());
    }
    if (names.empty()) raise(errc::empty_input, "no .png files in background directory: " + dir);
    std::sort(names.begin(), names.end());
    return names;
}

std::string image_relpath(std::int64_t identity, std::int64_t sample) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "images/id%05" PRId64 "/s%04" PRId64 ".png", identity, sample);
    return buf;
}

} // namespace

std::optional<DatasetSpec> preset_spec(const std::string& name) {
    DatasetSpec spec;
    if (name == "recognition-desk") {
        spec.num_identities = 200;
        spec.samples_per_identity = 10;
    } else if (name == "landmarks-desk") {
        spec.num_identities = 400;
        spec.samples_per_identity = 5;
    } else if (name == "recognition-paper") {
        spec.num_identities = 20000;
        spec.samples_per_identity = 100;
    } else if (name == "landmarks-paper") {
        spec.num_identities = 20000;
        spec.samples_per_identity = 5;
    } else {
        return std::nullopt;
    }
    return spec;
}

nlohmann::json spec_to_json(const DatasetSpec& spec) {
    return nlohmann::json{
        {"num_identities", spec.num_identities},
        {"samples_per_identity", spec.samples_per_identity},
        {"yaw_range", {spec.pose_ranges.yaw.lo_deg, spec.pose_ranges.yaw.hi_deg}},
        {"pitch_range", {spec.pose_ranges.pitch.lo_deg, spec.pose_ranges.pitch.hi_deg}},
        {"roll_range", {spec.pose_ranges.roll.lo_deg, spec.pose_ranges.roll.hi_deg}},
        {"expression_enabled", spec.expression_enabled},
        {"illumination_prior_path", spec.illumination_prior_path},
        {"background_dir", spec.background_dir},
        {"seed", spec.seed},
        {"frame_width", spec.frame_width},
        {"frame_height", spec.frame_height},
        {"fill", spec.fill},
    };
}

std::string spec_hash(const DatasetSpec& spec) {
    const std::string canonical = spec_to_json(spec).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

IdentityCoefficients identity_coefficients_for(const MorphableModel& model, std::uint64_t seed,
                                               std::int64_t identity_id) {
    RandomStream rng(derive_seed(seed, {kIdentityStream, static_cast<std::uint64_t>(identity_id)}));
    return sample_identity(model, rng);
}

DatasetSpec frontal_bias_spec(const DatasetSpec& spec) {
    validate_spec(spec);
    DatasetSpec biased = spec;
    biased.pose_ranges.yaw = {-35.0, 35.0};
    return biased;
}

DatasetSpec half_identity_spec(const DatasetSpec& spec) {
    validate_spec(spec);
    if (spec.num_identities < 2)
        raise(errc::bad_parameter, "need at least 2 identities to halve");
    if (spec.num_identities % 2 != 0)
        raise(errc::bad_parameter, "identity count must be even to halve while keeping the total");
    DatasetSpec halved = spec;
    halved.num_identities = spec.num_identities / 2;
    halved.samples_per_identity = spec.samples_per_identity * 2;
    return halved;
}

Manifest generate_dataset(const DatasetSpec& spec, const MorphableModel& model,
                          const std::string& out_dir, int jobs) {
    validate_spec(spec);
    if (jobs < 1) raise(errc::bad_parameter, "jobs must be at least 1");

    const IlluminationPrior prior = load_illumination_prior(spec.illumination_prior_path);
    const std::vector<std::string> background_names = list_backgrounds(spec.background_dir);
    std::vector<Image8> backgrounds;
    backgrounds.reserve(background_names.size());
    for (const auto& name : background_names)
        backgrounds.push_back(load_png((fs::path(spec.background_dir) / name).string()));

    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "images", ec);
    if (ec) raise(errc::io_failure, "cannot create " + out_dir);
    for (std::int64_t i = 0; i < spec.num_identities; ++i)
        fs::create_directories(fs::path(out_dir) / fs::path(image_relpath(i, 0)).parent_path());

    const Camera camera = Camera::for_frame(spec.frame_width, spec.frame_height);
    const std::string hash = spec_hash(spec);
    const std::int64_t total = spec.num_identities * spec.samples_per_identity;

    // One identity draw per identity, independent of sample count.
    std::vector<IdentityCoefficients> identities(spec.num_identities);
    for (std::int64_t i = 0; i < spec.num_identities; ++i)
        identities[i] = identity_coefficients_for(model, spec.seed, i);

    Manifest records(total);
    std::atomic<std::int64_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const std::int64_t r = next.fetch_add(1);
            if (r >= total) return;
            try {
                const std::int64_t identity = r / spec.samples_per_identity;
                const std::int64_t sample = r % spec.samples_per_identity;

                // Fixed per-image draw order: expression, pose, illumination,
                // background index, crop offsets.
                RandomStream rng(derive_seed(spec.seed, {kImageStream,
                                                         static_cast<std::uint64_t>(identity),
                                                         static_cast<std::uint64_t>(sample)}));
                ExpressionCoefficients expression;
                if (spec.expression_enabled) {
                    expression = sample_expression(model, rng);
                } else {
                    expression.expr = Eigen::VectorXd::Zero(model.expr_rank());
                }
                Pose pose = sample_pose(spec.pose_ranges, rng);
                const Illumination illum = sample_illumination(prior, rng);
                const std::size_t bg_idx = rng.uniform_index(backgrounds.size());
                const int offset_x = static_cast<int>(rng.uniform_index(2 * spec.frame_width + 1)) -
                                     spec.frame_width;
                const int offset_y = static_cast<int>(rng.uniform_index(2 * spec.frame_height + 1)) -
                                     spec.frame_height;

                const FaceMesh mesh = synthesize_instance(model, identities[identity], expression);
                pose.translation = auto_frame(mesh, rotation_matrix(pose), camera, spec.fill);

                const Framebuffer fb = rasterize(mesh, pose, camera, illum);
                const Image8 image = composite_background(fb, backgrounds[bg_idx], offset_x, offset_y);

                ManifestRecord& rec = records[r];
                rec.image_path = image_relpath(identity, sample);
                rec.identity_id = identity;
                rec.sample_idx = sample;
                rec.yaw_deg = rad_to_deg(pose.yaw);
                rec.pitch_deg = rad_to_deg(pose.pitch);
                rec.roll_deg = rad_to_deg(pose.roll);
                rec.translation = pose.translation;
                rec.illumination = illum.coeffs;
                rec.landmarks = project_landmarks(model, mesh, pose, camera, fb);
                rec.face_box = face_box(rec.landmarks);
                rec.background_id = background_names[bg_idx];
                rec.spec_hash = hash;

                save_png(image, (fs::path(out_dir) / rec.image_path).string());
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(total);
                return;
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(jobs);
        for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    write_manifest(records, (fs::path(out_dir) / "manifest.jsonl").string());
    return records;
}

nlohmann::json record_to_json(const ManifestRecord& record) {
    nlohmann::json object = record.extra.is_object() ? record.extra : nlohmann::json::object();
    object["image_path"] = record.image_path;
    object["identity_id"] = record.identity_id;
    object["sample_idx"] = record.sample_idx;
    object["pose"] = {{"yaw_deg", record.yaw_deg},
                      {"pitch_deg", record.pitch_deg},
                      {"roll_deg", record.roll_deg},
                      {"translation",
                       {record.translation.x(), record.translation.y(), record.translation.z()}}};
    nlohmann::json illum = nlohmann::json::array();
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < 9; ++k) illum.push_back(record.illumination(c, k));
    object["illumination"] = std::move(illum);
    nlohmann::json lms = nlohmann::json::array();
    for (const auto& lm : record.landmarks)
        lms.push_back({lm.position.x(), lm.position.y(), lm.visible ? 1 : 0});
    object["landmarks"] = std::move(lms);
    object["face_box"] = {record.face_box.x0, record.face_box.y0, record.face_box.x1,
                          record.face_box.y1};
    object["background_id"] = record.background_id;
    object["spec_hash"] = record.spec_hash;
    return object;
}

ManifestRecord record_from_json(const nlohmann::json& object) {
    if (!object.is_object()) raise(errc::bad_record, "manifest line is not a JSON object");
    ManifestRecord rec;
    try {
        rec.image_path = object.at("image_path").get<std::string>();
        rec.identity_id = object.at("identity_id").get<std::int64_t>();
        rec.sample_idx = object.at("sample_idx").get<std::int64_t>();
        const auto& pose = object.at("pose");
        rec.yaw_deg = pose.at("yaw_deg").get<double>();
        rec.pitch_deg = pose.at("pitch_deg").get<double>();
        rec.roll_deg = pose.at("roll_deg").get<double>();
        const auto& t = pose.at("translation");
        rec.translation = Eigen::Vector3d(t.at(0).get<double>(), t.at(1).get<double>(),
                                          t.at(2).get<double>());
        const auto& illum = object.at("illumination");
        if (illum.size() != 27) raise(errc::bad_record, "illumination must hold 27 numbers");
        for (int i = 0; i < 27; ++i) rec.illumination(i / 9, i % 9) = illum.at(i).get<double>();
        for (const auto& lm : object.at("landmarks")) {
            if (!lm.is_array() || lm.size() != 3)
                raise(errc::bad_record, "landmark entries must be [x, y, visible]");
            ProjectedLandmark p;
            p.position = Eigen::Vector2d(lm.at(0).get<double>(), lm.at(1).get<double>());
            p.visible = lm.at(2).get<int>() != 0;
            rec.landmarks.push_back(p);
        }
        const auto& box = object.at("face_box");
        rec.face_box = FaceBox{box.at(0).get<double>(), box.at(1).get<double>(),
                               box.at(2).get<double>(), box.at(3).get<double>()};
        rec.background_id = object.value("background_id", std::string());
        rec.spec_hash = object.value("spec_hash", std::string());
    } catch (const nlohmann::json::exception& e) {
        raise(errc::bad_record, std::string("malformed manifest record: ") + e.what());
    }

    static const char* known[] = {"image_path", "identity_id", "sample_idx",    "pose",
                                  "illumination", "landmarks",  "face_box",      "background_id",
                                  "spec_hash"};
    rec.extra = nlohmann::json::object();
    for (auto it = object.begin(); it != object.end(); ++it) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return it.key() == k; }) == std::end(known))
            rec.extra[it.key()] = it.value();
    }
    return rec;
}

Manifest read_manifest(const std::string& path) {
    if (!fs::exists(path)) raise(errc::missing_file, "no such file: " + path);
    std::ifstream in(path);
    if (!in) raise(errc::io_failure, "cannot open " + path);

    Manifest records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json object = nlohmann::json::parse(line, nullptr, false);
        if (object.is_discarded())
            raise(errc::bad_record, "line " + std::to_string(line_no) + ": invalid JSON");
        try {
            records.push_back(record_from_json(object));
        } catch (const Error& e) {
            raise(errc::bad_record, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void write_manifest(const Manifest& records, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(errc::io_failure, "cannot write " + path);
    for (const auto& rec : records) out << record_to_json(rec).dump() << '\n';
    out.flush();
    if (!out) raise(errc::io_failure, "write failed on " + path);
}

std::pair<Image8, std::vector<Eigen::Vector2d>>
augment_mirror(const Image8& image, const std::vector<Eigen::Vector2d>& landmarks,
               const std::vector<std::pair<int, int>>& flip_pairs) {
    const int n = static_cast<int>(landmarks.size());
    std::vector<bool> used(landmarks.size(), false);
    for (const auto& [a, b] : flip_pairs) {
        if (a < 0 || b < 0 || a >= n || b >= n)
            raise(errc::bad_pairing, "flip pair index out of range");
        if (a == b) raise(errc::bad_pairing, "flip pair maps an index to itself");
        if (used[a] || used[b]) raise(errc::bad_pairing, "landmark index appears in two flip pairs");
        used[a] = used[b] = true;
    }

    std::vector<Eigen::Vector2d> mirrored(landmarks.size());
    for (std::size_t i = 0; i < landmarks.size(); ++i)
        mirrored[i] = Eigen::Vector2d(image.width - 1 - landmarks[i].x(), landmarks[i].y());
    for (const auto& [a, b] : flip_pairs) std::swap(mirrored[a], mirrored[b]);
    return {flip_horizontal(image), std::move(mirrored)};
}

std::pair<Image8, std::vector<Eigen::Vector2d>>
rotate_about_box(const Image8& image, const std::vector<Eigen::Vector2d>& landmarks,
                 const FaceBox& box, double angle_deg) {
    const double cx = 0.5 * (box.x0 + box.x1);
    const double cy = 0.5 * (box.y0 + box.y1);
    const double a = deg_to_rad(angle_deg);
    const double ca = std::cos(a);
    const double sa = std::sin(a);

    std::vector<Eigen::Vector2d> moved(landmarks.size());
    for (std::size_t i = 0; i < landmarks.size(); ++i) {
        const double dx = landmarks[i].x() - cx;
        const double dy = landmarks[i].y() - cy;
        moved[i] = Eigen::Vector2d(cx + ca * dx - sa * dy, cy + sa * dx + ca * dy);
    }
    return {rotate_bilinear(image, cx, cy, angle_deg), std::move(moved)};
}

std::pair<Image8, std::vector<Eigen::Vector2d>>
augment_rotate(const Image8& image, const std::vector<Eigen::Vector2d>& landmarks,
               const FaceBox& box, RandomStream& rng) {
    return rotate_about_box(image, landmarks, box, rng.uniform(-30.0, 30.0));
}

} // namespace morphgen
