#pragma once

#include <filesystem>
#include <string>

#include "aqua/image.hpp"

namespace aqua {

/// How read_depth treats non-finite or non-positive samples.
enum class DepthPolicy {
    Strict, // throw ValidationError
    Repair, // replace with the smallest valid sample in the map
};

// PNG, 8- or 16-bit RGB. Grayscale and palette files are expanded to RGB,
// alpha is dropped.
EncodedImage read_png(const std::filesystem::path& path);
void write_png(const EncodedImage& img, const std::filesystem::path& path);

// EXR, 32-bit float. RGB for radiance/medium maps, single channel for depth.
LinearImage read_exr(const std::filesystem::path& path);
void write_exr(const LinearImage& img, const std::filesystem::path& path);

// PFM, single channel float32. Rows are stored bottom-up; the scale header's
// sign carries endianness per the PFM convention. Write-then-read is bitwise
// lossless up to float32.
DepthMap read_pfm(const std::filesystem::path& path);
void write_pfm(const DepthMap& map, const std::filesystem::path& path);

/// Load a depth map from .pfm, single-channel .exr, or 16-bit .png with a
/// same-stem .json sidecar {"scale": meters, "offset": meters}.
DepthMap read_depth(const std::filesystem::path& path, DepthPolicy policy = DepthPolicy::Strict);
/// Write a depth map; format chosen from the extension (.pfm or .exr).
void write_depth(const DepthMap& map, const std::filesystem::path& path);

/// Write text to path atomically (temp file in the same directory + rename).
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

/// FNV-1a content hash of a file, as a fixed-width hex string.
std::string file_content_hash(const std::filesystem::path& path);

} // namespace aqua
