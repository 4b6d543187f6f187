#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aqua/image.hpp"
#include "aqua/rng.hpp"

namespace aqua {

/// One water type with attenuation sampled at 600/525/475 nm, projected to
/// R/G/B. Units 1/m.
struct JerlovEntry {
    std::string name;
    Vec3 kd;
};

/// The ten-type oceanographic water clarity taxonomy. Entries are ordered
/// clearest to most turbid as listed in the source data file.
struct JerlovTable {
    std::vector<JerlovEntry> types;
};

/// Load the water type table from its versioned CSV data file.
/// Throws DecodeError with the offending row on malformed input, and
/// ValidationError when the table does not hold exactly 10 positive entries.
JerlovTable load_jerlov_table(const std::filesystem::path& csv_path);

/// Physical sanity rails for attenuation coefficients, 1/m.
struct AttenuationRails {
    double beta_min = 0.01;
    double beta_max = 6.0;
};

struct AttenuationSample {
    Vec3 beta_d;    // direct-transmission attenuation
    Vec3 beta_b;    // backscatter coefficient
    int type_index; // which water type was drawn
};

/// Draw (beta_d, beta_b) for one synthetic sample: uniform water type choice,
/// then an independent uniform jitter factor in [1-jitter, 1+jitter] per
/// channel. beta_d and beta_b are jittered independently of each other, so
/// the two coefficients differ even though they start from the same water
/// type. Results are clamped to the rails. jitter must be in [0, 0.5].
AttenuationSample sample_attenuation(const JerlovTable& table, Rng& rng, double jitter,
                                     const AttenuationRails& rails = {});

} // namespace aqua
