#include "aqua/formation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "aqua/errors.hpp"

namespace aqua {

namespace {

void require_depth_match(const LinearImage& img, const DepthMap& depth) {
    if (!depth.matches(img)) {
        throw PairingError("depth " + std::to_string(depth.width()) + "x" +
                           std::to_string(depth.height()) + " does not match image " +
                           std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }
}

// Largest possible overshoot of J*T + B above 1 for J, b_inf <= 1:
// sup_z (e^{-bd z} - e^{-bb z}). Positive only when bb > bd; the supremum is
// attained at z* = ln(bb/bd) / (bb - bd).
double max_overshoot(double bd, double bb) {
    if (bb <= bd) return 0.0;
    const double z_star = std::log(bb / bd) / (bb - bd);
    return std::exp(-bd * z_star) - std::exp(-bb * z_star);
}

} // namespace

LinearImage transmission_map(const DepthMap& depth, const Vec3& beta_d) {
    for (double b : beta_d) {
        if (!(b > 0.0) || !std::isfinite(b)) {
            throw ValidationError("attenuation coefficients must be positive and finite");
        }
    }
    LinearImage out(depth.width(), depth.height());
    double* dst = out.data();
    const double* z = depth.data();
    const std::size_t n = depth.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            // Keep T strictly positive so restore's division is defined even
            // before flooring.
            dst[i * 3 + c] = std::max(std::exp(-beta_d[c] * z[i]), 1e-300);
        }
    }
    return out;
}

LinearImage backscatter_map(const DepthMap& depth, const Vec3& beta_b, const Vec3& b_inf) {
    for (double b : beta_b) {
        if (!(b > 0.0) || !std::isfinite(b)) {
            throw ValidationError("backscatter coefficients must be positive and finite");
        }
    }
    for (double v : b_inf) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError("background light must be in [0, 1]");
        }
    }
    LinearImage out(depth.width(), depth.height());
    double* dst = out.data();
    const double* z = depth.data();
    const std::size_t n = depth.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            dst[i * 3 + c] = b_inf[c] * (1.0 - std::exp(-beta_b[c] * z[i]));
        }
    }
    return out;
}

LinearImage compose(const LinearImage& clean, const MediumMaps& maps) {
    if (!clean.same_shape(maps.t) || !clean.same_shape(maps.b)) {
        throw PairingError("medium maps do not match image dimensions");
    }
    LinearImage out(clean.width(), clean.height());
    const double* j = clean.data();
    const double* t = maps.t.data();
    const double* b = maps.b.data();
    double* dst = out.data();
    const std::size_t n = clean.value_count();
    for (std::size_t i = 0; i < n; ++i) dst[i] = j[i] * t[i] + b[i];
    return out;
}

RestoreResult restore(const LinearImage& underwater, const MediumMaps& maps, double t_floor) {
    if (!underwater.same_shape(maps.t) || !underwater.same_shape(maps.b)) {
        throw PairingError("medium maps do not match image dimensions");
    }
    if (!(t_floor > 0.0)) throw ValidationError("t_floor must be positive");

    RestoreResult result{LinearImage(underwater.width(), underwater.height()),
                         std::vector<std::uint8_t>(underwater.pixel_count(), 0), 0};
    const double* i_uw = underwater.data();
    const double* t = maps.t.data();
    const double* b = maps.b.data();
    double* dst = result.image.data();
    const std::size_t n = underwater.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        bool floored = false;
        for (std::size_t c = 0; c < 3; ++c) {
            const std::size_t v = p * 3 + c;
            double denom = t[v];
            if (denom < t_floor) {
                denom = t_floor;
                floored = true;
            }
            dst[v] = std::clamp((i_uw[v] - b[v]) / denom, 0.0, 1.0);
        }
        if (floored) {
            result.floored[p] = 1;
            ++result.floored_count;
        }
    }
    return result;
}

ValidityReport validity_check(const MediumMaps& maps, const ValidityThresholds& thresholds) {
    if (!maps.t.same_shape(maps.b)) throw PairingError("T and B dimensions differ");

    ValidityReport report;
    const double* t = maps.t.data();
    const std::size_t n = maps.t.pixel_count();

    double channel_sum[3] = {0.0, 0.0, 0.0};
    std::size_t dark = 0;
    for (std::size_t p = 0; p < n; ++p) {
        double min_c = t[p * 3];
        channel_sum[0] += t[p * 3];
        for (std::size_t c = 1; c < 3; ++c) {
            channel_sum[c] += t[p * 3 + c];
            min_c = std::min(min_c, t[p * 3 + c]);
        }
        if (min_c < thresholds.t_floor) ++dark;
    }

    report.min_mean_transmission =
        std::min({channel_sum[0], channel_sum[1], channel_sum[2]}) / static_cast<double>(n);
    report.dark_fraction = static_cast<double>(dark) / static_cast<double>(n);
    report.accepted = report.dark_fraction <= thresholds.dark_max &&
                      report.min_mean_transmission >= thresholds.t_mean_min;
    return report;
}

SynthesisRecord synthesize(const LinearImage& clean, const DepthMap& depth,
                           const MediumParams& params) {
    require_depth_match(clean, depth);
    if (!clean.all_finite()) throw ValidationError("clean image holds non-finite values");
    if (!depth.all_valid()) throw ValidationError("depth holds non-finite or non-positive values");
    const double* j = clean.data();
    for (std::size_t i = 0; i < clean.value_count(); ++i) {
        if (j[i] < 0.0 || j[i] > 1.0) {
            throw ValidationError("clean image must be in [0, 1]");
        }
    }

    MediumMaps maps{transmission_map(depth, params.beta_d),
                    backscatter_map(depth, params.beta_b, params.b_inf)};
    LinearImage underwater = compose(clean, maps);
    const ValidityReport validity = validity_check(maps);

    // With J <= 1 the composed radiance is bounded by
    //   1 + b_inf * sup_z(e^{-bd z} - e^{-bb z}),
    // which collapses to 1 when bb <= bd. Exceeding the bound means the maps
    // and the composition disagree, so treat it as a hard failure. Values are
    // intentionally NOT clamped here; clamping happens at encode only.
    for (std::size_t c = 0; c < 3; ++c) {
        const double bound =
            1.0 + params.b_inf[c] * max_overshoot(params.beta_d[c], params.beta_b[c]) + 1e-6;
        const double* i_uw = underwater.data();
        for (std::size_t p = 0; p < underwater.pixel_count(); ++p) {
            if (i_uw[p * 3 + c] > bound) {
                throw ValidationError("composed radiance exceeds its physical bound");
            }
        }
    }
    return SynthesisRecord{params, std::move(maps), std::move(underwater), clean, depth, validity};
}

SynthesisRecord synthesize_with_resampling(const LinearImage& clean, const DepthMap& depth,
                                           const JerlovTable& table,
                                           const BackgroundLightLibrary& lib, Rng& rng,
                                           const ResamplingConfig& config) {
    if (config.max_attempts < 1) throw ValidationError("max_attempts must be >= 1");

    std::optional<SynthesisRecord> best;
    for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
        const AttenuationSample atten = sample_attenuation(table, rng, config.jitter, config.rails);
        MediumParams params;
        params.beta_d = atten.beta_d;
        params.beta_b = atten.beta_b;
        params.b_inf = sample_background_light(lib, rng);

        SynthesisRecord record = synthesize(clean, depth, params);
        record.validity = validity_check(record.maps, config.thresholds);
        record.validity.resample_count = attempt;

        if (record.validity.accepted) return record;
        if (!best ||
            record.validity.min_mean_transmission > best->validity.min_mean_transmission) {
            best = std::move(record);
        }
    }
    // Every draw lost too much signal; hand back the least-bad record so
    // batch synthesis degrades instead of aborting.
    best->validity.accepted = false;
    best->validity.resample_count = config.max_attempts;
    return std::move(*best);
}

} // namespace aqua
