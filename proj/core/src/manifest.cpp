#include "aqua/manifest.hpp"

#include <json.hpp>

#include "aqua/errors.hpp"
#include "aqua/image_io.hpp"
#include "aqua/version.hpp"

namespace aqua {

namespace {

nlohmann::json vec3_to_json(const Vec3& v) { return {v[0], v[1], v[2]}; }

Vec3 vec3_from_json(const nlohmann::json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

nlohmann::json params_to_json(const MediumParams& params) {
    return {{"beta_d", vec3_to_json(params.beta_d)},
            {"beta_b", vec3_to_json(params.beta_b)},
            {"b_inf", vec3_to_json(params.b_inf)}};
}

MediumParams params_from_json(const nlohmann::json& j) {
    MediumParams params;
    params.beta_d = vec3_from_json(j.at("beta_d"));
    params.beta_b = vec3_from_json(j.at("beta_b"));
    params.b_inf = vec3_from_json(j.at("b_inf"));
    return params;
}

nlohmann::json validity_to_json(const ValidityReport& v) {
    return {{"min_mean_transmission", v.min_mean_transmission},
            {"dark_fraction", v.dark_fraction},
            {"accepted", v.accepted},
            {"resample_count", v.resample_count}};
}

ValidityReport validity_from_json(const nlohmann::json& j) {
    ValidityReport v;
    v.min_mean_transmission = j.at("min_mean_transmission").get<double>();
    v.dark_fraction = j.at("dark_fraction").get<double>();
    v.accepted = j.at("accepted").get<bool>();
    v.resample_count = j.at("resample_count").get<int>();
    return v;
}

} // namespace

std::string sidecar_to_json(const SampleSidecar& sidecar) {
    nlohmann::json doc;
    doc["schema_version"] = sidecar.schema_version;
    doc["toolkit_version"] = sidecar.toolkit_version;
    doc["id"] = sidecar.id;
    doc["stream_seed"] = sidecar.stream_seed;
    doc["params"] = params_to_json(sidecar.params);
    doc["validity"] = validity_to_json(sidecar.validity);
    doc["thresholds"] = {{"t_floor", sidecar.thresholds.t_floor},
                         {"dark_max", sidecar.thresholds.dark_max},
                         {"t_mean_min", sidecar.thresholds.t_mean_min}};
    doc["source_image"] = sidecar.source_image;
    doc["source_depth"] = sidecar.source_depth;
    doc["files"] = {{"underwater", sidecar.underwater},
                    {"clean", sidecar.clean},
                    {"t_map", sidecar.t_map},
                    {"b_map", sidecar.b_map},
                    {"depth", sidecar.depth}};
    return doc.dump(2) + "\n";
}

SampleSidecar sidecar_from_json(const std::string& json_text) {
    SampleSidecar sidecar;
    try {
        const nlohmann::json doc = nlohmann::json::parse(json_text);
        sidecar.schema_version = doc.at("schema_version").get<int>();
        sidecar.toolkit_version = doc.at("toolkit_version").get<std::string>();
        sidecar.id = doc.at("id").get<std::string>();
        sidecar.stream_seed = doc.at("stream_seed").get<std::uint64_t>();
        sidecar.params = params_from_json(doc.at("params"));
        sidecar.validity = validity_from_json(doc.at("validity"));
        const nlohmann::json& thresholds = doc.at("thresholds");
        sidecar.thresholds.t_floor = thresholds.at("t_floor").get<double>();
        sidecar.thresholds.dark_max = thresholds.at("dark_max").get<double>();
        sidecar.thresholds.t_mean_min = thresholds.at("t_mean_min").get<double>();
        sidecar.source_image = doc.at("source_image").get<std::string>();
        sidecar.source_depth = doc.at("source_depth").get<std::string>();
        const nlohmann::json& files = doc.at("files");
        sidecar.underwater = files.at("underwater").get<std::string>();
        sidecar.clean = files.at("clean").get<std::string>();
        sidecar.t_map = files.at("t_map").get<std::string>();
        sidecar.b_map = files.at("b_map").get<std::string>();
        sidecar.depth = files.at("depth").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("sample sidecar: ") + e.what());
    }
    return sidecar;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["schema_version"] = manifest.schema_version;
    doc["toolkit_version"] = manifest.toolkit_version;
    doc["config"] = nlohmann::json::parse(manifest.config_json);
    nlohmann::json entries = nlohmann::json::array();
    for (const ManifestEntry& entry : manifest.entries) {
        entries.push_back({{"id", entry.id},
                           {"source_image", entry.source_image},
                           {"depth_file", entry.depth_file},
                           {"sidecar", entry.sidecar},
                           {"validity", validity_to_json(entry.validity)}});
    }
    doc["entries"] = std::move(entries);
    atomic_write_text(path, doc.dump(2) + "\n");
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    DatasetManifest manifest;
    try {
        const nlohmann::json doc = nlohmann::json::parse(read_text(path));
        manifest.schema_version = doc.at("schema_version").get<int>();
        manifest.toolkit_version = doc.at("toolkit_version").get<std::string>();
        manifest.config_json = doc.at("config").dump();
        for (const nlohmann::json& e : doc.at("entries")) {
            ManifestEntry entry;
            entry.id = e.at("id").get<std::string>();
            entry.source_image = e.at("source_image").get<std::string>();
            entry.depth_file = e.at("depth_file").get<std::string>();
            entry.sidecar = e.at("sidecar").get<std::string>();
            entry.validity = validity_from_json(e.at("validity"));
            manifest.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
    return manifest;
}

} // namespace aqua
