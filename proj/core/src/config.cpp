#include "aqua/config.hpp"

#include <json.hpp>

#include "aqua/errors.hpp"

namespace aqua {

namespace {

nlohmann::json parse_file(const std::filesystem::path& json_path) {
    try {
        return nlohmann::json::parse(read_text(json_path));
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(json_path.string() + ": " + e.what());
    }
}

} // namespace

SynthesisConfig load_synthesis_config(const std::filesystem::path& json_path) {
    const nlohmann::json doc = parse_file(json_path);
    SynthesisConfig config;
    try {
        config.images = doc.at("images").get<std::string>();
        config.depths = doc.at("depths").get<std::string>();
        config.output = doc.at("output").get<std::string>();
        config.library = doc.at("library").get<std::string>();
        config.jerlov_table = doc.at("water_types").get<std::string>();
        config.seed = doc.value("seed", std::uint64_t{0});
        config.jitter = doc.value("jitter", 0.15);
        config.rails.beta_min = doc.value("beta_min", config.rails.beta_min);
        config.rails.beta_max = doc.value("beta_max", config.rails.beta_max);
        config.thresholds.t_floor = doc.value("t_floor", config.thresholds.t_floor);
        config.thresholds.dark_max = doc.value("dark_max", config.thresholds.dark_max);
        config.thresholds.t_mean_min = doc.value("t_mean_min", config.thresholds.t_mean_min);
        config.samples_per_image = doc.value("samples_per_image", 1);
        config.max_attempts = doc.value("max_attempts", 10);
        config.size_policy = doc.value("size_policy", std::string("crop8"));
        const std::string policy = doc.value("depth_policy", std::string("strict"));
        if (policy == "strict") {
            config.depth_policy = DepthPolicy::Strict;
        } else if (policy == "repair") {
            config.depth_policy = DepthPolicy::Repair;
        } else {
            throw ValidationError("depth_policy must be 'strict' or 'repair'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(json_path.string() + ": " + e.what());
    }

    if (config.samples_per_image < 1) throw ValidationError("samples_per_image must be >= 1");
    if (config.max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
    if (config.size_policy != "crop8" && config.size_policy != "none") {
        throw ValidationError("size_policy must be 'crop8' or 'none'");
    }
    if (!(config.jitter >= 0.0 && config.jitter <= 0.5)) {
        throw ValidationError("jitter must be in [0, 0.5]");
    }
    return config;
}

std::string synthesis_config_to_json(const SynthesisConfig& config) {
    nlohmann::json doc;
    doc["seed"] = config.seed;
    doc["jitter"] = config.jitter;
    doc["beta_min"] = config.rails.beta_min;
    doc["beta_max"] = config.rails.beta_max;
    doc["t_floor"] = config.thresholds.t_floor;
    doc["dark_max"] = config.thresholds.dark_max;
    doc["t_mean_min"] = config.thresholds.t_mean_min;
    doc["samples_per_image"] = config.samples_per_image;
    doc["max_attempts"] = config.max_attempts;
    doc["size_policy"] = config.size_policy;
    doc["depth_policy"] = config.depth_policy == DepthPolicy::Strict ? "strict" : "repair";
    return doc.dump();
}

LibraryConfig load_library_config(const std::filesystem::path& json_path) {
    const nlohmann::json doc = parse_file(json_path);
    LibraryConfig config;
    try {
        config.images = doc.at("images").get<std::string>();
        config.output = doc.at("output").get<std::string>();
        config.ulap_coefficients = doc.at("ulap_coefficients").get<std::string>();
        config.k = doc.value("k", 10);
        config.seed = doc.value("seed", std::uint64_t{0});
        config.far_fraction = doc.value("far_fraction", 0.001);
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(json_path.string() + ": " + e.what());
    }
    if (config.k < 1) throw ValidationError("k must be >= 1");
    if (!(config.far_fraction > 0.0 && config.far_fraction <= 1.0)) {
        throw ValidationError("far_fraction must be in (0, 1]");
    }
    return config;
}

} // namespace aqua
