#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>

#include "aqua/color.hpp"
#include "aqua/image.hpp"
#include "aqua/image_io.hpp"
#include "aqua/rng.hpp"

namespace aqua::test {

/// Unique directory under the system temp root, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        const std::filesystem::path base = std::filesystem::temp_directory_path();
        std::random_device rd;
        for (int attempt = 0; attempt < 64; ++attempt) {
            std::filesystem::path candidate =
                base / ("aqua_test_" + std::to_string(rd() % 0x1000000) + "_" +
                        std::to_string(rd() % 0x1000000));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp directory");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

/// Uniform noise image in [0, 1].
inline LinearImage noise_image(Rng& rng, int width, int height) {
    LinearImage img(width, height);
    for (std::size_t i = 0; i < img.value_count(); ++i) img.data()[i] = rng.uniform();
    return img;
}

/// Photo-like fixture: low-frequency color fields plus a few solid rectangles
/// for edges, kept inside [0.02, 0.98].
inline LinearImage structured_image(Rng& rng, int width, int height) {
    LinearImage img(width, height);
    double freq_x[3], freq_y[3], phase[3], base[3];
    for (int c = 0; c < 3; ++c) {
        freq_x[c] = rng.uniform(0.5, 3.0);
        freq_y[c] = rng.uniform(0.5, 3.0);
        phase[c] = rng.uniform(0.0, 6.283185307179586);
        base[c] = rng.uniform(0.3, 0.7);
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double u = static_cast<double>(x) / width;
            const double v = static_cast<double>(y) / height;
            for (int c = 0; c < 3; ++c) {
                const double wave =
                    0.25 * std::cos(6.283185307179586 * (freq_x[c] * u + freq_y[c] * v) +
                                    phase[c]);
                img.at(x, y, c) = base[c] + wave;
            }
        }
    }
    const int rects = 3 + static_cast<int>(rng.uniform_int(3));
    for (int r = 0; r < rects; ++r) {
        const int rw = 2 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(width / 2)));
        const int rh = 2 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(height / 2)));
        const int x0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(width - 1)));
        const int y0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(height - 1)));
        const Vec3 color = {rng.uniform(), rng.uniform(), rng.uniform()};
        for (int y = y0; y < std::min(height, y0 + rh); ++y) {
            for (int x = x0; x < std::min(width, x0 + rw); ++x) {
                img.set_pixel(x, y, color);
            }
        }
    }
    // Fine texture keeps local gradients nonzero everywhere, like sensor
    // noise in real photographs; exactly flat regions would be degenerate
    // inputs for block-ratio sharpness statistics.
    for (std::size_t i = 0; i < img.value_count(); ++i) {
        img.data()[i] = std::clamp(img.data()[i] + rng.uniform(-0.02, 0.02), 0.02, 0.98);
    }
    return img;
}

/// Smooth positive depth in [lo, hi] meters.
inline DepthMap smooth_depth(Rng& rng, int width, int height, double lo = 0.5, double hi = 8.0) {
    DepthMap map(width, height);
    const double fx = rng.uniform(0.5, 2.0);
    const double fy = rng.uniform(0.5, 2.0);
    const double phase = rng.uniform(0.0, 6.283185307179586);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double u = static_cast<double>(x) / width;
            const double v = static_cast<double>(y) / height;
            const double t =
                0.5 + 0.5 * std::cos(6.283185307179586 * (fx * u + fy * v) + phase);
            map.at(x, y) = lo + (hi - lo) * t;
        }
    }
    return map;
}

/// Write a clean PNG + PFM depth fixture corpus: img_000.png .. img_{n-1}.png
/// under images_dir and matching stems under depths_dir.
inline void write_fixture_corpus(const std::filesystem::path& images_dir,
                                 const std::filesystem::path& depths_dir, int count, int width,
                                 int height, std::uint64_t seed, double depth_lo = 0.5,
                                 double depth_hi = 8.0) {
    std::filesystem::create_directories(images_dir);
    std::filesystem::create_directories(depths_dir);
    for (int i = 0; i < count; ++i) {
        Rng rng(Rng::derive_stream(seed, "fixture", static_cast<std::uint64_t>(i)));
        const LinearImage img = structured_image(rng, width, height);
        const DepthMap depth = smooth_depth(rng, width, height, depth_lo, depth_hi);
        char name[32];
        std::snprintf(name, sizeof(name), "img_%03d", i);
        write_png(linear_to_srgb(img, 16), images_dir / (std::string(name) + ".png"));
        write_pfm(depth, depths_dir / (std::string(name) + ".pfm"));
    }
}

/// Underwater-looking corpus for library building: blue-green cast, darker
/// with distance from the top of the frame.
inline void write_underwater_corpus(const std::filesystem::path& dir, int count, int width,
                                    int height, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    for (int i = 0; i < count; ++i) {
        Rng rng(Rng::derive_stream(seed, "underwater", static_cast<std::uint64_t>(i)));
        LinearImage img(width, height);
        const double hue = rng.uniform(0.0, 1.0); // blends blue toward green
        const Vec3 water = {0.02 + 0.05 * rng.uniform(), 0.25 + 0.35 * hue,
                            0.55 - 0.25 * hue + 0.2 * rng.uniform()};
        for (int y = 0; y < height; ++y) {
            const double fade = 0.35 + 0.65 * (static_cast<double>(y) / height);
            for (int x = 0; x < width; ++x) {
                const double texture = 0.9 + 0.1 * rng.uniform();
                img.set_pixel(x, y, {std::clamp(water[0] * fade * texture, 0.0, 1.0),
                                     std::clamp(water[1] * fade * texture, 0.0, 1.0),
                                     std::clamp(water[2] * fade * texture, 0.0, 1.0)});
            }
        }
        char name[32];
        std::snprintf(name, sizeof(name), "sea_%03d", i);
        write_png(linear_to_srgb(img, 8), dir / (std::string(name) + ".png"));
    }
}

inline std::filesystem::path data_dir() { return std::filesystem::path(AQUA_DATA_DIR); }

} // namespace aqua::test
