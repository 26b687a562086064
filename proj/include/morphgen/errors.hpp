/*
 * morphgen - synthetic face image generation and evaluation toolkit.
 *
 * File: include/morphgen/errors.hpp
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

#include <stdexcept>
#include <string>

namespace morphgen {

enum class errc {
    missing_file,
    bad_magic,
    dimension_mismatch,
    invariant_violation,
    io_failure,
    bad_parameter,
    behind_camera,
    not_unit,
    degenerate_mesh,
    empty_prior,
    bad_record,
    empty_texture,
    bad_pairing,
    zero_vector,
    one_class_only,
    bad_fold_shape,
    zero_diagonal,
    empty_input,
    empty_manifest,
};

const char* errc_name(errc code);

/// Exception carrying a machine-checkable error code next to the message.
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) { throw Error(code, message); }

inline const char* errc_name(errc code) {
    switch (code) {
    case errc::missing_file: return "MissingFile";
    case errc::bad_magic: return "BadMagic";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::invariant_violation: return "InvariantViolation";
    case errc::io_failure: return "IoFailure";
    case errc::bad_parameter: return "BadParameter";
    case errc::behind_camera: return "BehindCamera";
    case errc::not_unit: return "NotUnit";
    case errc::degenerate_mesh: return "DegenerateMesh";
    case errc::empty_prior: return "EmptyPrior";
    case errc::bad_record: return "BadRecord";
    case errc::empty_texture: return "EmptyTexture";
    case errc::bad_pairing: return "BadPairing";
    case errc::zero_vector: return "ZeroVector";
    case errc::one_class_only: return "OneClassOnly";
    case errc::bad_fold_shape: return "BadFoldShape";
    case errc::zero_diagonal: return "ZeroDiagonal";
    case errc::empty_input: return "EmptyInput";
    case errc::empty_manifest: return "EmptyManifest";
    }
    return "Unknown";
}

} // namespace morphgen
