#include "aqua/light_library.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "aqua/color.hpp"
#include "aqua/errors.hpp"
#include "aqua/image_io.hpp"
#include "aqua/version.hpp"
#include "parallel.hpp"

namespace aqua {

UlapCoeffs load_ulap_coeffs(const std::filesystem::path& json_path) {
    UlapCoeffs coeffs;
    try {
        const nlohmann::json doc = nlohmann::json::parse(read_text(json_path));
        coeffs.mu0 = doc.at("mu0").get<double>();
        coeffs.mu1 = doc.at("mu1").get<double>();
        coeffs.mu2 = doc.at("mu2").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(json_path.string() + ": " + e.what());
    }
    return coeffs;
}

std::vector<double> ulap_relative_depth(const LinearImage& img, const UlapCoeffs& coeffs) {
    const std::size_t n = img.pixel_count();
    std::vector<double> depth(n);
    const double* src = img.data();
    for (std::size_t i = 0; i < n; ++i) {
        // The prior was fitted on gamma-encoded channels.
        const double r = srgb_encode(std::clamp(src[i * 3], 0.0, 1.0));
        const double g = srgb_encode(std::clamp(src[i * 3 + 1], 0.0, 1.0));
        const double b = srgb_encode(std::clamp(src[i * 3 + 2], 0.0, 1.0));
        depth[i] = coeffs.mu0 + coeffs.mu1 * std::max(g, b) + coeffs.mu2 * r;
    }
    return depth;
}

Vec3 extract_background_light(const LinearImage& img, const std::vector<double>& rel_depth,
                              double far_fraction) {
    const std::size_t n = img.pixel_count();
    if (rel_depth.size() != n) throw ValidationError("relative depth size mismatch");
    if (!(far_fraction > 0.0 && far_fraction <= 1.0)) {
        throw ValidationError("far_fraction must be in (0, 1]");
    }

    const std::size_t take =
        std::min(n, static_cast<std::size_t>(std::ceil(far_fraction * static_cast<double>(n))));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // stable_sort keeps raster order among equal depths, making ties
    // deterministic.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rel_depth[a] > rel_depth[b];
    });

    const double* src = img.data();
    std::size_t best = order[0];
    double best_luma = -1.0;
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t p = order[i];
        const double luma = luminance709({src[p * 3], src[p * 3 + 1], src[p * 3 + 2]});
        if (luma > best_luma) {
            best_luma = luma;
            best = p;
        }
    }
    return {std::clamp(src[best * 3], 0.0, 1.0), std::clamp(src[best * 3 + 1], 0.0, 1.0),
            std::clamp(src[best * 3 + 2], 0.0, 1.0)};
}

namespace {

double sq_dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    return dx * dx + dy * dy;
}

} // namespace

KMeansResult kmeans_2d(const std::vector<std::array<double, 2>>& points, int k,
                       std::uint64_t seed, double tol, int max_iters) {
    const std::size_t n = points.size();
    if (k < 1) throw ValidationError("k must be >= 1");
    if (n < static_cast<std::size_t>(k)) {
        throw ValidationError("fewer points than clusters");
    }

    Rng rng(seed);
    KMeansResult result;
    result.centroids.reserve(static_cast<std::size_t>(k));

    // k-means++ seeding.
    result.centroids.push_back(points[rng.uniform_int(n)]);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    while (result.centroids.size() < static_cast<std::size_t>(k)) {
        const auto& latest = result.centroids.back();
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            min_d2[i] = std::min(min_d2[i], sq_dist(points[i], latest));
            total += min_d2[i];
        }
        std::size_t chosen = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_d2[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            // All remaining points coincide with a centroid.
            chosen = rng.uniform_int(n);
        }
        result.centroids.push_back(points[chosen]);
    }

    result.assignments.assign(n, 0);
    std::vector<std::array<double, 2>> sums(static_cast<std::size_t>(k));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k));

    for (int iter = 0; iter < max_iters; ++iter) {
        // Assignment step; ties go to the lowest cluster id.
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d2 = sq_dist(points[i], result.centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d2 = sq_dist(points[i], result.centroids[static_cast<std::size_t>(c)]);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
            result.assignments[i] = best;
            objective += best_d2;
        }
        if (!result.objective_trace.empty() &&
            objective > result.objective_trace.back() + 1e-12) {
            throw ValidationError("k-means objective increased between iterations");
        }
        result.objective_trace.push_back(objective);
        result.iterations = iter + 1;

        // Update step; an empty cluster keeps its previous centroid.
        std::fill(sums.begin(), sums.end(), std::array<double, 2>{0.0, 0.0});
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(result.assignments[i]);
            sums[c][0] += points[i][0];
            sums[c][1] += points[i][1];
            ++counts[c];
        }
        double max_shift = 0.0;
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            if (counts[c] == 0) continue;
            const std::array<double, 2> next = {sums[c][0] / static_cast<double>(counts[c]),
                                                sums[c][1] / static_cast<double>(counts[c])};
            max_shift = std::max(max_shift, std::sqrt(sq_dist(next, result.centroids[c])));
            result.centroids[c] = next;
        }
        if (max_shift < tol) break;
    }

    result.inertia = result.objective_trace.back();
    return result;
}

BackgroundLightLibrary build_light_library(const std::vector<LinearImage>& corpus,
                                           const UlapCoeffs& coeffs,
                                           const LightLibraryOptions& options) {
    if (corpus.empty()) throw ValidationError("empty corpus");
    if (options.k < 1) throw ValidationError("k must be >= 1");

    BackgroundLightLibrary lib;
    lib.seed = options.seed;
    lib.entries.resize(corpus.size());
    detail::parallel_for(corpus.size(), options.workers, [&](std::size_t i) {
        const std::vector<double> depth = ulap_relative_depth(corpus[i], coeffs);
        lib.entries[i] = extract_background_light(corpus[i], depth, options.far_fraction);
    });

    lib.k = options.k;
    if (corpus.size() < static_cast<std::size_t>(options.k)) {
        lib.k = static_cast<int>(corpus.size());
        lib.reduced_k = true;
    }

    std::vector<std::array<double, 2>> points(lib.entries.size());
    for (std::size_t i = 0; i < lib.entries.size(); ++i) {
        const Vec3 lab = linear_rgb_to_lab(lib.entries[i]);
        points[i] = {lab[1], lab[2]};
    }

    const KMeansResult km = kmeans_2d(points, lib.k, lib.seed);
    lib.assignments = km.assignments;
    lib.centroids = km.centroids;
    lib.inertia = km.inertia;
    return lib;
}

Vec3 sample_background_light(const BackgroundLightLibrary& lib, Rng& rng) {
    if (lib.entries.empty()) throw ValidationError("empty background light library");

    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(lib.k));
    for (std::size_t i = 0; i < lib.assignments.size(); ++i) {
        const int c = lib.assignments[i];
        if (c < 0 || c >= lib.k) throw ValidationError("cluster assignment out of range");
        members[static_cast<std::size_t>(c)].push_back(i);
    }
    std::vector<std::size_t> non_empty;
    for (std::size_t c = 0; c < members.size(); ++c) {
        if (!members[c].empty()) non_empty.push_back(c);
    }
    if (non_empty.empty()) throw ValidationError("no populated clusters");

    const std::size_t cluster = non_empty[rng.uniform_int(non_empty.size())];
    const std::vector<std::size_t>& pool = members[cluster];
    return lib.entries[pool[rng.uniform_int(pool.size())]];
}

void save_light_library(const BackgroundLightLibrary& lib, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["toolkit_version"] = kVersion;
    doc["k"] = lib.k;
    doc["reduced_k"] = lib.reduced_k;
    doc["seed"] = lib.seed;
    doc["inertia"] = lib.inertia;
    nlohmann::json entries = nlohmann::json::array();
    for (const Vec3& e : lib.entries) entries.push_back({e[0], e[1], e[2]});
    doc["entries"] = std::move(entries);
    doc["assignments"] = lib.assignments;
    nlohmann::json centroids = nlohmann::json::array();
    for (const auto& c : lib.centroids) centroids.push_back({c[0], c[1]});
    doc["centroids"] = std::move(centroids);
    doc["source_hashes"] = lib.source_hashes;
    atomic_write_text(path, doc.dump(2) + "\n");
}

BackgroundLightLibrary load_light_library(const std::filesystem::path& path) {
    BackgroundLightLibrary lib;
    try {
        const nlohmann::json doc = nlohmann::json::parse(read_text(path));
        lib.k = doc.at("k").get<int>();
        lib.reduced_k = doc.value("reduced_k", false);
        lib.seed = doc.at("seed").get<std::uint64_t>();
        lib.inertia = doc.value("inertia", 0.0);
        for (const auto& e : doc.at("entries")) {
            lib.entries.push_back({e.at(0).get<double>(), e.at(1).get<double>(),
                                   e.at(2).get<double>()});
        }
        lib.assignments = doc.at("assignments").get<std::vector<int>>();
        for (const auto& c : doc.at("centroids")) {
            lib.centroids.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
        }
        lib.source_hashes = doc.value("source_hashes", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
    if (lib.assignments.size() != lib.entries.size()) {
        throw ValidationError(path.string() + ": assignment/entry count mismatch");
    }
    return lib;
}

} // namespace aqua
