#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aqua/image.hpp"
#include "aqua/rng.hpp"

namespace aqua {

/// Coefficients of the light-attenuation depth prior:
///   d(x) = mu0 + mu1 * max(G, B) + mu2 * R
/// evaluated on the sRGB-normalized image. Defaults live in a versioned JSON
/// data file transcribed from the published fit, not in code.
struct UlapCoeffs {
    double mu0 = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
};

UlapCoeffs load_ulap_coeffs(const std::filesystem::path& json_path);

/// Relative (unitless) scene depth per pixel, used only for ranking.
std::vector<double> ulap_relative_depth(const LinearImage& img, const UlapCoeffs& coeffs);

/// Background light estimate: among the ceil(far_fraction * N) pixels of
/// greatest relative depth, the color of the one with maximal Rec. 709
/// luminance (raster order breaks ties). Always returns the color of an
/// actual pixel, clamped to [0,1].
Vec3 extract_background_light(const LinearImage& img, const std::vector<double>& rel_depth,
                              double far_fraction = 0.001);

/// Library of background lights harvested from a corpus of real underwater
/// images, clustered in the Lab 'ab' plane.
struct BackgroundLightLibrary {
    std::vector<Vec3> entries;                     // linear RGB, one per source image
    std::vector<int> assignments;                  // cluster id per entry
    std::vector<std::array<double, 2>> centroids;  // Lab (a,b)
    int k = 10;
    std::uint64_t seed = 0;
    double inertia = 0.0;
    bool reduced_k = false;                        // set when entries < requested k
    std::vector<std::string> source_hashes;
};

struct KMeansResult {
    std::vector<std::array<double, 2>> centroids;
    std::vector<int> assignments;
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> objective_trace; // one value per Lloyd iteration
};

/// Lloyd k-means on 2-d points with k-means++ seeding. Deterministic for a
/// fixed seed. Converges when the max centroid displacement drops below tol
/// or after max_iters. The objective trace is checked to be non-increasing
/// and the run aborts with ValidationError if it is not.
KMeansResult kmeans_2d(const std::vector<std::array<double, 2>>& points, int k,
                       std::uint64_t seed, double tol = 1e-6, int max_iters = 300);

struct LightLibraryOptions {
    int k = 10;
    std::uint64_t seed = 0;
    double far_fraction = 0.001;
    int workers = 1;
};

/// Extract one background light per image, then cluster in Lab 'ab'.
/// When the corpus holds fewer than k images the cluster count is reduced to
/// the entry count and reduced_k is set.
BackgroundLightLibrary build_light_library(const std::vector<LinearImage>& corpus,
                                           const UlapCoeffs& coeffs,
                                           const LightLibraryOptions& options);

/// Uniform choice among non-empty clusters, then a uniform member of that
/// cluster. Weighting is by cluster, not by entry, so populous clusters do
/// not dominate the water-color diversity.
Vec3 sample_background_light(const BackgroundLightLibrary& lib, Rng& rng);

void save_light_library(const BackgroundLightLibrary& lib, const std::filesystem::path& path);
BackgroundLightLibrary load_light_library(const std::filesystem::path& path);

} // namespace aqua
