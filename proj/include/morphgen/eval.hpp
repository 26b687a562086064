/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: include/morphgen/eval.hpp
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

#include "morphgen/datagen.hpp"
#include "morphgen/render.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace morphgen {

struct Embedding {
    Eigen::VectorXd vector;
};

struct ScoredPair {
    double score = 0.0;
    bool same_identity = false;
};

struct RocPoint {
    double threshold = 0.0;
    double far = 0.0;
    double tar = 0.0;
};

/// ROC enumerated at every distinct observed score (descending), acceptance
/// rule score >= threshold. FAR is non-decreasing along the curve and the
/// last point is always (1, 1).
struct RocCurve {
    std::vector<RocPoint> points;
};

struct FoldAccuracy {
    std::vector<double> per_fold;
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation over folds
};

struct LandmarkPrediction {
    std::string image_path;
    std::vector<Eigen::Vector2d> predicted;
    std::vector<Eigen::Vector2d> ground_truth;
    FaceBox face_box;
};

/// s(a, b) = a.b / (|a| |b|). Throws ZeroVector on a zero-norm operand.
double cosine_similarity(const Embedding& a, const Embedding& b);

/// Softmax-weighted average of all pairwise cosine similarities between two
/// embedding sets: sum w_ij s_ij with w_ij = exp(beta s_ij) normalized.
/// beta = 0 reduces to the plain mean, singleton sets to plain cosine.
double template_similarity(const std::vector<Embedding>& a, const std::vector<Embedding>& b,
                           double beta = 1.0);

RocCurve roc(const std::vector<ScoredPair>& pairs);

/// Reads the curve at a target FAR in (0, 1): TAR linearly interpolated on
/// the first curve segment (threshold-descending order, (0,0) prepended)
/// whose FARs bracket the target.
double tar_at_far(const RocCurve& curve, double far);

/// Cross-validated verification accuracy: per held-out fold, the threshold
/// maximizing accuracy on the remaining folds is swept over all midpoints
/// between adjacent distinct scores (plus the accept-everything threshold);
/// ties pick the lowest threshold. Folds must share one balanced
/// positive/negative composition.
FoldAccuracy verification_accuracy_kfold(const std::vector<std::vector<ScoredPair>>& folds);

/// Mean landmark distance normalized by the face-box diagonal.
double landmark_error(const LandmarkPrediction& prediction);

/// Fraction of images whose normalized error is <= threshold.
double detection_accuracy(const std::vector<double>& errors, double threshold);

/// Distribution summary of one manifest: pose histograms (15-degree bins
/// over [-180, 180)), identity and per-identity sample statistics,
/// illumination coefficient moments, background usage.
nlohmann::json bias_report(const Manifest& manifest);

/// Adds per-bin absolute frequency differences between two manifests.
nlohmann::json bias_compare(const Manifest& a, const Manifest& b);

// --- evaluation file formats (one JSON object per line) ---

/// Embeddings: {"id": str, "template_id": str?, "vector": [...]}. Lines
/// grouped by template_id when present, otherwise by id.
std::map<std::string, std::vector<Embedding>> read_embeddings(const std::string& path);

struct PairRecord {
    std::string a;
    std::string b;
    bool same = false;
    int fold = 0;
};

/// Pairs: {"a": str, "b": str, "same": bool, "fold": int?}.
std::vector<PairRecord> read_pairs(const std::string& path);

/// Predictions: {"image_path": str, "predicted": [[x, y], ...]}.
struct PredictionRecord {
    std::string image_path;
    std::vector<Eigen::Vector2d> predicted;
};
std::vector<PredictionRecord> read_landmark_predictions(const std::string& path);

/// Scores every pair against the embedding groups (cosine for singletons,
/// softmax template averaging otherwise) and buckets them by fold id.
std::vector<std::vector<ScoredPair>>
score_pairs(const std::map<std::string, std::vector<Embedding>>& groups,
            const std::vector<PairRecord>& pairs, double beta = 1.0);

inline std::vector<ScoredPair> flatten_folds(const std::vector<std::vector<ScoredPair>>& folds) {
    std::vector<ScoredPair> all;
    for (const auto& fold : folds) all.insert(all.end(), fold.begin(), fold.end());
    return all;
}

} // namespace morphgen
