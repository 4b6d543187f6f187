#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "aqua/formation.hpp"
#include "aqua/image_io.hpp"
#include "aqua/jerlov.hpp"

namespace aqua {

/// Declarative configuration for a synthesis run. Loaded from a single JSON
/// file; every run embeds a snapshot of it in the manifest.
struct SynthesisConfig {
    std::filesystem::path images;        // directory of clean PNG images
    std::filesystem::path depths;        // directory of paired depth files (same stem)
    std::filesystem::path output;        // output root
    std::filesystem::path library;       // background light library JSON
    std::filesystem::path jerlov_table;  // water type CSV
    std::uint64_t seed = 0;
    double jitter = 0.15;
    AttenuationRails rails;
    ValidityThresholds thresholds;
    int samples_per_image = 1;
    int max_attempts = 10;
    std::string size_policy = "crop8";   // "crop8" (center crop to multiple of 8) or "none"
    DepthPolicy depth_policy = DepthPolicy::Strict;
};

SynthesisConfig load_synthesis_config(const std::filesystem::path& json_path);
/// Snapshot embedded in manifests: normalized, without machine-local detail.
std::string synthesis_config_to_json(const SynthesisConfig& config);

/// Configuration for building a background light library.
struct LibraryConfig {
    std::filesystem::path images;             // directory of real underwater PNG images
    std::filesystem::path output;             // library JSON path
    std::filesystem::path ulap_coefficients;  // depth prior coefficient JSON
    int k = 10;
    std::uint64_t seed = 0;
    double far_fraction = 0.001;
};

LibraryConfig load_library_config(const std::filesystem::path& json_path);

} // namespace aqua
