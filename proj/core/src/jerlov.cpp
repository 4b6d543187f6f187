#include "aqua/jerlov.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "aqua/errors.hpp"
#include "aqua/image_io.hpp"

namespace aqua {

namespace {

constexpr int kTypeCount = 10;

std::string strip(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& field, const std::string& row) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw DecodeError("bad numeric field '" + field + "' in row: " + row);
    }
    return value;
}

} // namespace

JerlovTable load_jerlov_table(const std::filesystem::path& csv_path) {
    std::istringstream in(read_text(csv_path));

    JerlovTable table;
    std::string line;
    while (std::getline(in, line)) {
        const std::string row = strip(line);
        if (row.empty() || row[0] == '#') continue;

        std::vector<std::string> fields;
        std::string field;
        std::istringstream split(row);
        while (std::getline(split, field, ',')) fields.push_back(strip(field));
        if (fields.size() != 4) {
            throw DecodeError("expected 4 fields (name,kd_r,kd_g,kd_b) in row: " + row);
        }

        JerlovEntry entry;
        entry.name = fields[0];
        if (entry.name.empty()) throw DecodeError("empty water type name in row: " + row);
        for (int c = 0; c < 3; ++c) {
            entry.kd[static_cast<std::size_t>(c)] = parse_double(fields[static_cast<std::size_t>(c) + 1], row);
        }
        table.types.push_back(std::move(entry));
    }

    if (table.types.size() != kTypeCount) {
        throw ValidationError(csv_path.string() + ": expected " + std::to_string(kTypeCount) +
                              " water types, found " + std::to_string(table.types.size()));
    }
    for (const JerlovEntry& entry : table.types) {
        for (double v : entry.kd) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ValidationError(csv_path.string() + ": non-positive attenuation for type " +
                                      entry.name);
            }
        }
    }
    return table;
}

AttenuationSample sample_attenuation(const JerlovTable& table, Rng& rng, double jitter,
                                     const AttenuationRails& rails) {
    if (table.types.empty()) throw ValidationError("empty water type table");
    if (!(jitter >= 0.0 && jitter <= 0.5)) {
        throw ValidationError("jitter must be in [0, 0.5]");
    }
    if (!(rails.beta_min > 0.0) || !(rails.beta_max > rails.beta_min)) {
        throw ValidationError("attenuation rails must satisfy 0 < min < max");
    }

    AttenuationSample sample;
    sample.type_index = static_cast<int>(rng.uniform_int(table.types.size()));
    const Vec3& kd = table.types[static_cast<std::size_t>(sample.type_index)].kd;

    // Draw order is part of the pinned sequence: beta_d RGB, then beta_b RGB.
    for (std::size_t c = 0; c < 3; ++c) {
        const double factor = rng.uniform(1.0 - jitter, 1.0 + jitter);
        sample.beta_d[c] = std::clamp(kd[c] * factor, rails.beta_min, rails.beta_max);
    }
    for (std::size_t c = 0; c < 3; ++c) {
        const double factor = rng.uniform(1.0 - jitter, 1.0 + jitter);
        sample.beta_b[c] = std::clamp(kd[c] * factor, rails.beta_min, rails.beta_max);
    }
    return sample;
}

} // namespace aqua
