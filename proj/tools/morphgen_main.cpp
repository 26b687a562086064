/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: tools/morphgen_main.cpp
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
#include "morphgen/eval.hpp"
#include "morphgen/model.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace {

using morphgen::DatasetSpec;
using nlohmann::json;

// MORPHGEN_SEED wins over --seed when the variable is set.
std::uint64_t effective_seed(std::uint64_t flag_seed) {
    if (const char* env = std::getenv("MORPHGEN_SEED"))
        return std::strtoull(env, nullptr, 10);
    return flag_seed;
}

void emit_report(const json& report, const std::string& out_path, bool human) {
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) morphgen::raise(morphgen::errc::io_failure, "cannot write " + out_path);
        out << report.dump(2) << '\n';
    }
    if (human) {
        for (const auto& [key, value] : report.items())
            std::cout << key << ": " << value.dump() << '\n';
    } else {
        std::cout << report.dump(2) << std::endl;
    }
}

int run_make_toy_model(int rings, int ks, int kc, int ke, std::uint64_t seed,
                       const std::string& out_path) {
    const morphgen::MorphableModel model = morphgen::make_toy_model(rings, ks, kc, ke, seed);
    morphgen::save_model(model, out_path);
    json summary{{"path", out_path},          {"V", model.vertex_count},
                 {"T", model.triangle_count}, {"Ks", model.shape_rank()},
                 {"Kc", model.color_rank()},  {"Ke", model.expr_rank()},
                 {"L", model.landmark_count()}};
    std::cout << summary.dump(2) << std::endl;
    return 0;
}

struct GenerateArgs {
    std::string preset;
    std::string model_path;
    std::string prior_path;
    std::string background_dir;
    std::string out_dir;
    std::int64_t identities = 0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
    int width = 128;
    int height = 128;
    double fill = 0.7;
    bool no_expression = false;
    bool frontal_bias = false;
    bool half_identities = false;
    int jobs = 1;
    std::vector<double> yaw_range;
    std::vector<double> pitch_range;
    std::vector<double> roll_range;
};

int run_generate(const GenerateArgs& args) {
    DatasetSpec spec;
    if (!args.preset.empty()) {
        const auto preset = morphgen::preset_spec(args.preset);
        if (!preset)
            morphgen::raise(morphgen::errc::bad_parameter, "unknown preset " + args.preset);
        spec = *preset;
    }
    if (args.identities > 0) spec.num_identities = args.identities;
    if (args.samples > 0) spec.samples_per_identity = args.samples;
    if (args.preset.empty() && (args.identities <= 0 || args.samples <= 0))
        morphgen::raise(morphgen::errc::bad_parameter,
                        "--identities and --samples are required without a preset");

    spec.illumination_prior_path = args.prior_path;
    spec.background_dir = args.background_dir;
    spec.seed = effective_seed(args.seed);
    spec.frame_width = args.width;
    spec.frame_height = args.height;
    spec.fill = args.fill;
    spec.expression_enabled = !args.no_expression;
    if (args.yaw_range.size() == 2) spec.pose_ranges.yaw = {args.yaw_range[0], args.yaw_range[1]};
    if (args.pitch_range.size() == 2)
        spec.pose_ranges.pitch = {args.pitch_range[0], args.pitch_range[1]};
    if (args.roll_range.size() == 2)
        spec.pose_ranges.roll = {args.roll_range[0], args.roll_range[1]};

    if (args.frontal_bias) spec = morphgen::frontal_bias_spec(spec);
    if (args.half_identities) spec = morphgen::half_identity_spec(spec);

    const morphgen::MorphableModel model = morphgen::load_model(args.model_path);
    const morphgen::Manifest manifest =
        morphgen::generate_dataset(spec, model, args.out_dir, args.jobs);

    json summary{{"out_dir", args.out_dir},
                 {"manifest", args.out_dir + "/manifest.jsonl"},
                 {"records", manifest.size()},
                 {"identities", spec.num_identities},
                 {"samples_per_identity", spec.samples_per_identity},
                 {"spec_hash", morphgen::spec_hash(spec)}};
    std::cout << summary.dump(2) << std::endl;
    return 0;
}

int run_eval_verification(const std::string& embeddings_path, const std::string& pairs_path,
                          double beta, const std::vector<double>& fars,
                          const std::string& out_path, bool human) {
    const auto groups = morphgen::read_embeddings(embeddings_path);
    const auto pair_records = morphgen::read_pairs(pairs_path);
    const auto folds = morphgen::score_pairs(groups, pair_records, beta);
    const auto all_pairs = morphgen::flatten_folds(folds);

    json report;
    report["n_pairs"] = all_pairs.size();
    report["beta"] = beta;

    const morphgen::RocCurve curve = morphgen::roc(all_pairs);
    json tar = json::object();
    for (double far : fars) {
        char key[32];
        std::snprintf(key, sizeof(key), "%g", far);
        tar[key] = morphgen::tar_at_far(curve, far);
    }
    report["tar_at_far"] = tar;

    std::size_t populated = 0;
    for (const auto& fold : folds) populated += fold.empty() ? 0 : 1;
    if (folds.size() >= 2 && populated == folds.size()) {
        const morphgen::FoldAccuracy acc = morphgen::verification_accuracy_kfold(folds);
        report["n_folds"] = folds.size();
        report["fold_accuracy"] = acc.per_fold;
        report["accuracy_mean"] = acc.mean;
        report["accuracy_sd"] = acc.sd;
    } else {
        report["accuracy_mean"] = nullptr; // needs >= 2 populated folds
    }

    emit_report(report, out_path, human);
    return 0;
}

int run_eval_landmarks(const std::string& pred_path, const std::string& manifest_path,
                       const std::vector<double>& thresholds, const std::string& out_path,
                       bool human) {
    const morphgen::Manifest manifest = morphgen::read_manifest(manifest_path);
    const auto predictions = morphgen::read_landmark_predictions(pred_path);

    std::map<std::string, const morphgen::ManifestRecord*> by_path;
    for (const auto& rec : manifest) by_path[rec.image_path] = &rec;

    std::vector<double> errors;
    errors.reserve(predictions.size());
    for (const auto& pred : predictions) {
        const auto it = by_path.find(pred.image_path);
        if (it == by_path.end())
            morphgen::raise(morphgen::errc::bad_record,
                            "prediction references unknown image " + pred.image_path);
        morphgen::LandmarkPrediction lp;
        lp.image_path = pred.image_path;
        lp.predicted = pred.predicted;
        for (const auto& lm : it->second->landmarks) lp.ground_truth.push_back(lm.position);
        lp.face_box = it->second->face_box;
        errors.push_back(morphgen::landmark_error(lp));
    }

    json report;
    report["n_scored"] = errors.size();
    report["n_manifest"] = manifest.size();
    report["mean_error"] =
        errors.empty() ? 0.0 : std::accumulate(errors.begin(), errors.end(), 0.0) / errors.size();
    json detection = json::object();
    for (double threshold : thresholds) {
        char key[32];
        std::snprintf(key, sizeof(key), "%g", threshold);
        detection[key] = morphgen::detection_accuracy(errors, threshold);
    }
    report["detection_accuracy"] = detection;

    emit_report(report, out_path, human);
    return 0;
}

int run_bias_report(const std::string& manifest_path, const std::string& compare_path,
                    const std::string& out_path, bool human) {
    const morphgen::Manifest manifest = morphgen::read_manifest(manifest_path);
    json report;
    if (compare_path.empty()) {
        report = morphgen::bias_report(manifest);
    } else {
        const morphgen::Manifest other = morphgen::read_manifest(compare_path);
        report = morphgen::bias_compare(manifest, other);
    }
    emit_report(report, out_path, human);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"morphgen: synthetic face dataset generation and evaluation"};
    app.require_subcommand(1);

    // make-toy-model
    auto* toy = app.add_subcommand("make-toy-model", "Fabricate a procedural model file");
    int rings = 8, ks = 5, kc = 5, ke = 3;
    std::uint64_t toy_seed = 0;
    std::string toy_out;
    toy->add_option("--rings", rings, "Sphere subdivision rings (>= 4)");
    toy->add_option("--ks", ks, "Shape basis rank");
    toy->add_option("--kc", kc, "Color basis rank");
    toy->add_option("--ke", ke, "Expression basis rank");
    toy->add_option("--seed", toy_seed, "Model seed");
    toy->add_option("-o,--output", toy_out, "Output .mfm path")->required();

    // generate
    auto* gen = app.add_subcommand("generate", "Render a dataset with ground-truth manifest");
    GenerateArgs gen_args;
    gen->add_option("--preset", gen_args.preset,
                    "recognition-desk | landmarks-desk | recognition-paper | landmarks-paper");
    gen->add_option("--model", gen_args.model_path, "Model file (MFM1)")->required();
    gen->add_option("--prior", gen_args.prior_path, "Illumination prior JSON")->required();
    gen->add_option("--backgrounds", gen_args.background_dir, "Directory of PNG backgrounds")
        ->required();
    gen->add_option("-o,--output", gen_args.out_dir, "Output directory")->required();
    gen->add_option("--identities", gen_args.identities, "Identity count (overrides preset)");
    gen->add_option("--samples", gen_args.samples, "Samples per identity (overrides preset)");
    gen->add_option("--seed", gen_args.seed, "Dataset seed");
    gen->add_option("--width", gen_args.width, "Frame width");
    gen->add_option("--height", gen_args.height, "Frame height");
    gen->add_option("--fill", gen_args.fill, "Face fill fraction of the frame");
    gen->add_flag("--no-expression", gen_args.no_expression, "Disable expression sampling");
    gen->add_flag("--frontal-bias", gen_args.frontal_bias, "Squeeze yaw to [-35, 35] degrees");
    gen->add_flag("--half-identities", gen_args.half_identities,
                  "Halve identities, double samples per identity");
    gen->add_option("--jobs", gen_args.jobs, "Parallel render workers");
    gen->add_option("--yaw", gen_args.yaw_range, "Yaw range in degrees")->expected(2);
    gen->add_option("--pitch", gen_args.pitch_range, "Pitch range in degrees")->expected(2);
    gen->add_option("--roll", gen_args.roll_range, "Roll range in degrees")->expected(2);

    // eval-verification
    auto* ev = app.add_subcommand("eval-verification", "Score verification pairs");
    std::string ev_embeddings, ev_pairs, ev_out;
    double ev_beta = 1.0;
    std::vector<double> ev_fars{0.1};
    bool ev_human = false;
    ev->add_option("--embeddings", ev_embeddings, "Embeddings JSONL")->required();
    ev->add_option("--pairs", ev_pairs, "Pairs JSONL")->required();
    ev->add_option("--beta", ev_beta, "Softmax temperature for template averaging");
    ev->add_option("--far", ev_fars, "FAR operating points");
    ev->add_option("-o,--output", ev_out, "Also write the JSON report here");
    ev->add_flag("--human", ev_human, "Key/value table instead of JSON");

    // eval-landmarks
    auto* el = app.add_subcommand("eval-landmarks", "Score landmark predictions");
    std::string el_pred, el_manifest, el_out;
    std::vector<double> el_thresholds{0.03, 0.05};
    bool el_human = false;
    el->add_option("--pred", el_pred, "Predictions JSONL")->required();
    el->add_option("--manifest", el_manifest, "Ground-truth manifest JSONL")->required();
    el->add_option("--thresholds", el_thresholds, "Normalized error thresholds");
    el->add_option("-o,--output", el_out, "Also write the JSON report here");
    el->add_flag("--human", el_human, "Key/value table instead of JSON");

    // bias-report
    auto* br = app.add_subcommand("bias-report", "Distribution summary of a manifest");
    std::string br_manifest, br_compare, br_out;
    bool br_human = false;
    br->add_option("--manifest", br_manifest, "Manifest JSONL")->required();
    br->add_option("--compare", br_compare, "Second manifest for per-bin differences");
    br->add_option("-o,--output", br_out, "Also write the JSON report here");
    br->add_flag("--human", br_human, "Key/value table instead of JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (toy->parsed())
            return run_make_toy_model(rings, ks, kc, ke, effective_seed(toy_seed), toy_out);
        if (gen->parsed()) return run_generate(gen_args);
        if (ev->parsed())
            return run_eval_verification(ev_embeddings, ev_pairs, ev_beta, ev_fars, ev_out, ev_human);
        if (el->parsed()) return run_eval_landmarks(el_pred, el_manifest, el_thresholds, el_out, el_human);
        if (br->parsed()) return run_bias_report(br_manifest, br_compare, br_out, br_human);
    } catch (const morphgen::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
