#pragma once

#include <cstdint>
#include <vector>

#include "aqua/image.hpp"
#include "aqua/jerlov.hpp"
#include "aqua/light_library.hpp"
#include "aqua/rng.hpp"

namespace aqua {

/// Water medium for one synthetic sample: per-channel attenuation beta_d,
/// backscatter coefficient beta_b (both 1/m) and background light b_inf
/// (linear RGB in [0,1]).
struct MediumParams {
    Vec3 beta_d{};
    Vec3 beta_b{};
    Vec3 b_inf{};
};

/// Dense per-pixel medium: transmission T in (0,1] and backscatter radiance
/// B in [0, b_inf].
struct MediumMaps {
    LinearImage t;
    LinearImage b;
};

struct ValidityThresholds {
    double t_floor = 0.02;     // min-channel transmission below this marks a pixel dark
    double dark_max = 0.4;     // accepted fraction of dark pixels (inclusive)
    double t_mean_min = 0.08;  // required min-over-channels mean transmission
};

/// Information-loss gate for one synthesized sample.
struct ValidityReport {
    double min_mean_transmission = 0.0; // min over channels of the per-channel mean of T
    double dark_fraction = 0.0;         // fraction of pixels with min-channel T < t_floor
    bool accepted = false;
    int resample_count = 0;             // parameter redraws before this record
};

/// T_c(x) = exp(-beta_d_c * z(x))
LinearImage transmission_map(const DepthMap& depth, const Vec3& beta_d);

/// B_c(x) = b_inf_c * (1 - exp(-beta_b_c * z(x)))
LinearImage backscatter_map(const DepthMap& depth, const Vec3& beta_b, const Vec3& b_inf);

/// I = J * T + B, elementwise. Also the reconstruction used by the
/// evaluation-side scoring.
LinearImage compose(const LinearImage& clean, const MediumMaps& maps);

struct RestoreResult {
    LinearImage image;
    /// Per-pixel flag: 1 where any channel's transmission was below t_floor
    /// and the division was floored.
    std::vector<std::uint8_t> floored;
    std::size_t floored_count = 0;
};

/// Invert the decomposition: J = (I - B) / max(T, t_floor), clamped to [0,1].
RestoreResult restore(const LinearImage& underwater, const MediumMaps& maps, double t_floor = 0.05);

ValidityReport validity_check(const MediumMaps& maps, const ValidityThresholds& thresholds = {});

/// One fully synthesized paired sample.
struct SynthesisRecord {
    MediumParams params;
    MediumMaps maps;
    LinearImage underwater;
    LinearImage clean;
    DepthMap depth;
    ValidityReport validity;
};

/// Forward model: degrade a clean image through the medium described by
/// params at the given depth. The record's underwater image satisfies
/// I = J*T + B to within 1e-6 by construction.
SynthesisRecord synthesize(const LinearImage& clean, const DepthMap& depth,
                           const MediumParams& params);

struct ResamplingConfig {
    double jitter = 0.15;
    AttenuationRails rails;
    ValidityThresholds thresholds;
    int max_attempts = 10;
};

/// Draw medium parameters, synthesize, and gate on the validity report;
/// redraw on rejection up to max_attempts. If every attempt is rejected the
/// attempt with the highest min_mean_transmission is returned flagged
/// accepted=false, so batch jobs degrade instead of aborting.
SynthesisRecord synthesize_with_resampling(const LinearImage& clean, const DepthMap& depth,
                                           const JerlovTable& table,
                                           const BackgroundLightLibrary& lib, Rng& rng,
                                           const ResamplingConfig& config = {});

} // namespace aqua
