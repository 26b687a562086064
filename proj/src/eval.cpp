/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: src/eval.cpp
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
#include "morphgen/eval.hpp"

#include "morphgen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

namespace morphgen {

double cosine_similarity(const Embedding& a, const Embedding& b) {
    if (a.vector.size() != b.vector.size())
        raise(errc::dimension_mismatch, "embedding dimensions differ");
    const double na = a.vector.norm();
    const double nb = b.vector.norm();
    if (na == 0.0 || nb == 0.0) raise(errc::zero_vector, "cannot score a zero-norm embedding");
    return a.vector.dot(b.vector) / (na * nb);
}

double template_similarity(const std::vector<Embedding>& a, const std::vector<Embedding>& b,
                           double beta) {
    if (a.empty() || b.empty()) raise(errc::empty_input, "template sets must be non-empty");
    if (beta < 0.0) raise(errc::bad_parameter, "beta must be non-negative");

    std::vector<double> scores;
    scores.reserve(a.size() * b.size());
    for (const auto& ea : a)
        for (const auto& eb : b) scores.push_back(cosine_similarity(ea, eb));

    const double max_score = *std::max_element(scores.begin(), scores.end());
    double weight_sum = 0.0;
    double weighted = 0.0;
    for (double s : scores) {
        const double w = std::exp(beta * (s - max_score));
        weight_sum += w;
        weighted += w * s;
    }
    return weighted / weight_sum;
}

RocCurve roc(const std::vector<ScoredPair>& pairs) {
    if (pairs.empty()) raise(errc::empty_input, "no scored pairs");
    std::size_t positives = 0;
    for (const auto& p : pairs) {
        if (!std::isfinite(p.score)) raise(errc::bad_parameter, "scores must be finite");
        positives += p.same_identity ? 1 : 0;
    }
    const std::size_t negatives = pairs.size() - positives;
    if (positives == 0 || negatives == 0)
        raise(errc::one_class_only, "need at least one positive and one negative pair");

    std::vector<ScoredPair> sorted = pairs;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoredPair& x, const ScoredPair& y) { return x.score > y.score; });

    RocCurve curve;
    std::size_t cum_pos = 0;
    std::size_t cum_neg = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double threshold = sorted[i].score;
        while (i < sorted.size() && sorted[i].score == threshold) {
            (sorted[i].same_identity ? cum_pos : cum_neg) += 1;
            ++i;
        }
        curve.points.push_back({threshold, static_cast<double>(cum_neg) / negatives,
                                static_cast<double>(cum_pos) / positives});
    }
    return curve;
}

double tar_at_far(const RocCurve& curve, double far) {
    if (!(far > 0.0 && far < 1.0)) raise(errc::bad_parameter, "far must lie in (0, 1)");
    if (curve.points.empty()) raise(errc::empty_input, "empty roc curve");

    // Walk segments in curve order with a virtual (FAR 0, TAR 0) anchor; the
    // first bracketing segment decides, which keeps duplicate-FAR steps at
    // their pre-jump value.
    double prev_far = 0.0;
    double prev_tar = 0.0;
    for (const auto& point : curve.points) {
        if (prev_far <= far && far <= point.far) {
            if (point.far == prev_far) return prev_tar;
            const double t = (far - prev_far) / (point.far - prev_far);
            return prev_tar + t * (point.tar - prev_tar);
        }
        prev_far = point.far;
        prev_tar = point.tar;
    }
    return curve.points.back().tar;
}

namespace {

void validate_folds(const std::vector<std::vector<ScoredPair>>& folds) {
    if (folds.size() < 2) raise(errc::bad_fold_shape, "need at least two folds");
    std::size_t pos0 = 0, neg0 = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::size_t pos = 0, neg = 0;
        for (const auto& p : folds[f]) {
            if (!std::isfinite(p.score)) raise(errc::bad_parameter, "scores must be finite");
            (p.same_identity ? pos : neg) += 1;
        }
        if (pos == 0 || neg == 0)
            raise(errc::bad_fold_shape, "fold " + std::to_string(f) + " is missing a class");
        if (f == 0) {
            pos0 = pos;
            neg0 = neg;
        } else if (pos != pos0 || neg != neg0) {
            raise(errc::bad_fold_shape, "fold " + std::to_string(f) + " composition differs");
        }
    }
}

// Best accept->same threshold on the training pairs: candidates are the
// lowest score (accept everything) and all midpoints between adjacent
// distinct scores; ties resolve to the lowest candidate.
double best_threshold(std::vector<ScoredPair>& train) {
    std::sort(train.begin(), train.end(),
              [](const ScoredPair& x, const ScoredPair& y) { return x.score < y.score; });
    const std::size_t n = train.size();
    std::size_t positives = 0;
    for (const auto& p : train) positives += p.same_identity ? 1 : 0;

    // Accept-all start: TP = positives, TN = 0.
    std::size_t tp = positives;
    std::size_t tn = 0;
    double best = train.front().score;
    std::size_t best_correct = tp + tn;

    std::size_t i = 0;
    while (i < n) {
        const double score = train[i].score;
        while (i < n && train[i].score == score) {
            if (train[i].same_identity)
                --tp; // now rejected
            else
                ++tn;
            ++i;
        }
        if (i == n) break; // no score above: candidate would reject everything
        const double candidate = 0.5 * (score + train[i].score);
        if (tp + tn > best_correct) {
            best_correct = tp + tn;
            best = candidate;
        }
    }
    return best;
}

} // namespace

FoldAccuracy verification_accuracy_kfold(const std::vector<std::vector<ScoredPair>>& folds) {
    validate_folds(folds);

    FoldAccuracy result;
    for (std::size_t held = 0; held < folds.size(); ++held) {
        std::vector<ScoredPair> train;
        for (std::size_t f = 0; f < folds.size(); ++f)
            if (f != held) train.insert(train.end(), folds[f].begin(), folds[f].end());
        const double threshold = best_threshold(train);

        std::size_t correct = 0;
        for (const auto& p : folds[held])
            if ((p.score >= threshold) == p.same_identity) ++correct;
        result.per_fold.push_back(static_cast<double>(correct) / folds[held].size());
    }

    result.mean = std::accumulate(result.per_fold.begin(), result.per_fold.end(), 0.0) /
                  result.per_fold.size();
    double var = 0.0;
    for (double a : result.per_fold) var += (a - result.mean) * (a - result.mean);
    result.sd = std::sqrt(var / (result.per_fold.size() - 1));
    return result;
}

double landmark_error(const LandmarkPrediction& prediction) {
    if (prediction.predicted.size() != prediction.ground_truth.size() ||
        prediction.predicted.empty())
        raise(errc::dimension_mismatch, "prediction and ground truth lengths differ");
    const double diag = prediction.face_box.diagonal();
    if (diag <= 0.0) raise(errc::zero_diagonal, "face box has zero diagonal");

    double total = 0.0;
    for (std::size_t i = 0; i < prediction.predicted.size(); ++i)
        total += (prediction.predicted[i] - prediction.ground_truth[i]).norm();
    return total / prediction.predicted.size() / diag;
}

double detection_accuracy(const std::vector<double>& errors, double threshold) {
    if (errors.empty()) raise(errc::empty_input, "no landmark errors");
    if (!(threshold > 0.0)) raise(errc::bad_parameter, "threshold must be positive");
    const auto hits = std::count_if(errors.begin(), errors.end(),
                                    [&](double e) { return e <= threshold; });
    return static_cast<double>(hits) / errors.size();
}

namespace {

constexpr int kBinCount = 24; // 15-degree bins covering [-180, 180)
constexpr double kBinWidth = 15.0;

std::array<std::int64_t, kBinCount> angle_histogram(const Manifest& manifest,
                                                    double ManifestRecord::*angle) {
    std::array<std::int64_t, kBinCount> bins{};
    for (const auto& rec : manifest) {
        const double a = rec.*angle;
        int bin = static_cast<int>(std::floor((a + 180.0) / kBinWidth));
        bin = std::clamp(bin, 0, kBinCount - 1);
        bins[bin] += 1;
    }
    return bins;
}

nlohmann::json histogram_json(const std::array<std::int64_t, kBinCount>& bins) {
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < kBinCount; ++i)
        out.push_back({{"lo_deg", -180.0 + i * kBinWidth},
                       {"hi_deg", -180.0 + (i + 1) * kBinWidth},
                       {"count", bins[i]}});
    return out;
}

nlohmann::json frequency_diff(const std::array<std::int64_t, kBinCount>& a, std::size_t total_a,
                              const std::array<std::int64_t, kBinCount>& b, std::size_t total_b) {
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < kBinCount; ++i) {
        const double fa = static_cast<double>(a[i]) / total_a;
        const double fb = static_cast<double>(b[i]) / total_b;
        out.push_back({{"lo_deg", -180.0 + i * kBinWidth},
                       {"hi_deg", -180.0 + (i + 1) * kBinWidth},
                       {"abs_freq_diff", std::abs(fa - fb)}});
    }
    return out;
}

} // namespace

nlohmann::json bias_report(const Manifest& manifest) {
    if (manifest.empty()) raise(errc::empty_manifest, "manifest holds no records");

    std::map<std::int64_t, std::int64_t> per_identity;
    std::map<std::string, std::int64_t> backgrounds;
    Eigen::Matrix<double, 27, 1> illum_sum = Eigen::Matrix<double, 27, 1>::Zero();
    Eigen::Matrix<double, 27, 1> illum_sq = Eigen::Matrix<double, 27, 1>::Zero();

    for (const auto& rec : manifest) {
        per_identity[rec.identity_id] += 1;
        backgrounds[rec.background_id] += 1;
        for (int c = 0; c < 3; ++c)
            for (int k = 0; k < 9; ++k) {
                const double v = rec.illumination(c, k);
                illum_sum[c * 9 + k] += v;
                illum_sq[c * 9 + k] += v * v;
            }
    }

    const double n = static_cast<double>(manifest.size());
    nlohmann::json illum_mean = nlohmann::json::array();
    nlohmann::json illum_sd = nlohmann::json::array();
    for (int i = 0; i < 27; ++i) {
        const double mean = illum_sum[i] / n;
        illum_mean.push_back(mean);
        const double var = n > 1 ? std::max(0.0, (illum_sq[i] - n * mean * mean) / (n - 1)) : 0.0;
        illum_sd.push_back(std::sqrt(var));
    }

    std::int64_t min_samples = per_identity.begin()->second;
    std::int64_t max_samples = min_samples;
    for (const auto& [id, count] : per_identity) {
        min_samples = std::min(min_samples, count);
        max_samples = std::max(max_samples, count);
    }

    nlohmann::json bg = nlohmann::json::object();
    for (const auto& [name, count] : backgrounds) bg[name] = count;

    return nlohmann::json{
        {"records", manifest.size()},
        {"identities", per_identity.size()},
        {"samples_per_identity",
         {{"min", min_samples},
          {"max", max_samples},
          {"mean", n / static_cast<double>(per_identity.size())}}},
        {"yaw_hist", histogram_json(angle_histogram(manifest, &ManifestRecord::yaw_deg))},
        {"pitch_hist", histogram_json(angle_histogram(manifest, &ManifestRecord::pitch_deg))},
        {"roll_hist", histogram_json(angle_histogram(manifest, &ManifestRecord::roll_deg))},
        {"illumination", {{"mean", illum_mean}, {"sd", illum_sd}}},
        {"backgrounds", bg},
    };
}

nlohmann::json bias_compare(const Manifest& a, const Manifest& b) {
    if (a.empty() || b.empty()) raise(errc::empty_manifest, "manifest holds no records");
    nlohmann::json out;
    out["a"] = bias_report(a);
    out["b"] = bias_report(b);
    out["yaw_freq_diff"] = frequency_diff(angle_histogram(a, &ManifestRecord::yaw_deg), a.size(),
                                          angle_histogram(b, &ManifestRecord::yaw_deg), b.size());
    out["pitch_freq_diff"] =
        frequency_diff(angle_histogram(a, &ManifestRecord::pitch_deg), a.size(),
                       angle_histogram(b, &ManifestRecord::pitch_deg), b.size());
    out["roll_freq_diff"] = frequency_diff(angle_histogram(a, &ManifestRecord::roll_deg), a.size(),
                                           angle_histogram(b, &ManifestRecord::roll_deg), b.size());
    return out;
}

namespace {

nlohmann::json parse_jsonl_line(const std::string& line, std::size_t line_no) {
    nlohmann::json object = nlohmann::json::parse(line, nullptr, false);
    if (object.is_discarded() || !object.is_object())
        raise(errc::bad_record, "line " + std::to_string(line_no) + ": invalid JSON object");
    return object;
}

template <typename Fn> void for_each_jsonl(const std::string& path, Fn&& fn) {
    if (!std::filesystem::exists(path)) raise(errc::missing_file, "no such file: " + path);
    std::ifstream in(path);
    if (!in) raise(errc::io_failure, "cannot open " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        fn(parse_jsonl_line(line, line_no), line_no);
    }
}

} // namespace

std::map<std::string, std::vector<Embedding>> read_embeddings(const std::string& path) {
    std::map<std::string, std::vector<Embedding>> groups;
    for_each_jsonl(path, [&](const nlohmann::json& object, std::size_t line_no) {
        if (!object.contains("id") || !object.contains("vector") || !object["vector"].is_array() ||
            object["vector"].empty())
            raise(errc::bad_record,
                  "line " + std::to_string(line_no) + ": embedding needs an id and a vector");
        Embedding e;
        e.vector.resize(static_cast<Eigen::Index>(object["vector"].size()));
        for (Eigen::Index i = 0; i < e.vector.size(); ++i) {
            const auto& v = object["vector"][static_cast<std::size_t>(i)];
            if (!v.is_number())
                raise(errc::bad_record, "line " + std::to_string(line_no) + ": non-numeric vector entry");
            e.vector[i] = v.get<double>();
        }
        const std::string key = object.contains("template_id")
                                    ? object["template_id"].get<std::string>()
                                    : object["id"].get<std::string>();
        groups[key].push_back(std::move(e));
    });
    if (groups.empty()) raise(errc::empty_input, "no embeddings in " + path);
    return groups;
}

std::vector<PairRecord> read_pairs(const std::string& path) {
    std::vector<PairRecord> pairs;
    for_each_jsonl(path, [&](const nlohmann::json& object, std::size_t line_no) {
        if (!object.contains("a") || !object.contains("b") || !object.contains("same"))
            raise(errc::bad_record,
                  "line " + std::to_string(line_no) + ": pair needs fields a, b, same");
        PairRecord rec;
        rec.a = object["a"].get<std::string>();
        rec.b = object["b"].get<std::string>();
        rec.same = object["same"].get<bool>();
        rec.fold = object.value("fold", 0);
        if (rec.fold < 0)
            raise(errc::bad_record, "line " + std::to_string(line_no) + ": negative fold index");
        pairs.push_back(std::move(rec));
    });
    if (pairs.empty()) raise(errc::empty_input, "no pairs in " + path);
    return pairs;
}

std::vector<PredictionRecord> read_landmark_predictions(const std::string& path) {
    std::vector<PredictionRecord> records;
    for_each_jsonl(path, [&](const nlohmann::json& object, std::size_t line_no) {
        if (!object.contains("image_path") || !object.contains("predicted") ||
            !object["predicted"].is_array())
            raise(errc::bad_record,
                  "line " + std::to_string(line_no) + ": prediction needs image_path and predicted");
        PredictionRecord rec;
        rec.image_path = object["image_path"].get<std::string>();
        for (const auto& p : object["predicted"]) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                raise(errc::bad_record,
                      "line " + std::to_string(line_no) + ": predicted entries must be [x, y]");
            rec.predicted.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        records.push_back(std::move(rec));
    });
    if (records.empty()) raise(errc::empty_input, "no predictions in " + path);
    return records;
}

std::vector<std::vector<ScoredPair>>
score_pairs(const std::map<std::string, std::vector<Embedding>>& groups,
            const std::vector<PairRecord>& pairs, double beta) {
    int max_fold = 0;
    for (const auto& p : pairs) max_fold = std::max(max_fold, p.fold);
    std::vector<std::vector<ScoredPair>> folds(static_cast<std::size_t>(max_fold) + 1);

    for (const auto& p : pairs) {
        const auto ita = groups.find(p.a);
        const auto itb = groups.find(p.b);
        if (ita == groups.end()) raise(errc::bad_record, "pair references unknown id " + p.a);
        if (itb == groups.end()) raise(errc::bad_record, "pair references unknown id " + p.b);
        folds[static_cast<std::size_t>(p.fold)].push_back(
            {template_similarity(ita->second, itb->second, beta), p.same});
    }
    return folds;
}

} // namespace morphgen
