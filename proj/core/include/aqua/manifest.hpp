#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aqua/formation.hpp"

namespace aqua {

/// Per-sample JSON sidecar persisted next to the images. All paths are
/// relative to the dataset root so reruns into different roots produce
/// byte-identical sidecars.
struct SampleSidecar {
    int schema_version = 0;
    std::string toolkit_version;
    std::string id;
    std::uint64_t stream_seed = 0;
    MediumParams params;
    ValidityReport validity;
    ValidityThresholds thresholds;
    std::string source_image;  // as referenced by the config
    std::string source_depth;
    std::string underwater;    // outputs, relative to the dataset root
    std::string clean;
    std::string t_map;
    std::string b_map;
    std::string depth;
};

std::string sidecar_to_json(const SampleSidecar& sidecar);
SampleSidecar sidecar_from_json(const std::string& json_text);

struct ManifestEntry {
    std::string id;
    std::string source_image;
    std::string depth_file;
    std::string sidecar;  // relative path to the sample sidecar
    ValidityReport validity;
};

/// Dataset manifest: config snapshot plus one entry per synthesized sample.
/// Written atomically after all sample files exist, so a killed run never
/// leaves a manifest referencing missing files.
struct DatasetManifest {
    int schema_version = 0;
    std::string toolkit_version;
    std::string config_json;  // snapshot of the synthesis config (JSON object)
    std::vector<ManifestEntry> entries;
};

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

} // namespace aqua
