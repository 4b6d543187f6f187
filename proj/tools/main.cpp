#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "aqua/pipeline.hpp"
#include "aqua/version.hpp"

namespace {

int default_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-based underwater image synthesis, restoration and evaluation"};
    app.set_version_flag("--version", aqua::kVersion);
    app.require_subcommand(1);

    int workers = default_workers();
    app.add_option("--workers", workers, "Worker threads (never affects output bytes)")
        ->capture_default_str();

    // build-library
    auto* build = app.add_subcommand("build-library",
                                     "Cluster background lights from real underwater images");
    std::string build_config;
    std::uint64_t build_seed = 0;
    bool build_seed_set = false;
    build->add_option("--config", build_config, "Library config JSON")->required();
    build->add_option("--seed", build_seed, "Override the config seed")
        ->each([&](const std::string&) { build_seed_set = true; });

    // synthesize
    auto* synth = app.add_subcommand("synthesize", "Degrade clean RGB+depth pairs into a dataset");
    std::string synth_config;
    std::uint64_t synth_seed = 0;
    bool synth_seed_set = false;
    bool force = false;
    bool verify_after = false;
    synth->add_option("--config", synth_config, "Synthesis config JSON")->required();
    synth->add_option("--seed", synth_seed, "Override the config seed")
        ->each([&](const std::string&) { synth_seed_set = true; });
    synth->add_flag("--force", force, "Regenerate over an existing manifest");
    synth->add_flag("--verify", verify_after, "Reload and check every record after the run");

    // restore
    auto* rest = app.add_subcommand("restore", "Invert the formation model with known medium maps");
    std::string rest_input;
    std::string rest_maps;
    std::string rest_output;
    double t_floor = 0.05;
    rest->add_option("--input", rest_input, "Dataset root (manifest.json) or directory of PNGs")
        ->required();
    rest->add_option("--maps", rest_maps, "Directory of <stem>_T.exr/<stem>_B.exr predictions");
    rest->add_option("--output", rest_output, "Output directory")->required();
    rest->add_option("--t-floor", t_floor, "Transmission floor for the division")
        ->capture_default_str();

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Score predictions and write reports");
    std::string eval_pred;
    std::string eval_ref;
    std::string eval_output;
    std::string eval_mode = "full-reference";
    bool strict = false;
    eval->add_option("--predictions", eval_pred, "Directory of predicted images or _T/_B maps")
        ->required();
    eval->add_option("--reference", eval_ref, "Reference directory or dataset manifest.json");
    eval->add_option("--output", eval_output, "Report directory")->required();
    eval->add_option("--mode", eval_mode, "full-reference | reference-free | medium")
        ->check(CLI::IsMember({"full-reference", "reference-free", "medium"}))
        ->capture_default_str();
    eval->add_flag("--strict", strict, "Unmatched filenames fail the run");

    // verify
    auto* verify = app.add_subcommand("verify", "Check a dataset against its own sidecars");
    std::string verify_manifest;
    double map_tol = 1e-6;
    verify->add_option("manifest", verify_manifest, "Dataset root or manifest.json")->required();
    verify->add_option("--map-tol", map_tol, "Max allowed medium-map deviation")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Keep the documented exit codes: help/version exit 0, usage errors 1.
        return app.exit(e) == 0 ? 0 : aqua::kExitError;
    }

    try {
        if (build->parsed()) {
            aqua::LibraryConfig config = aqua::load_library_config(build_config);
            if (build_seed_set) config.seed = build_seed;
            return aqua::cmd_build_library(config, workers);
        }
        if (synth->parsed()) {
            aqua::SynthesisConfig config = aqua::load_synthesis_config(synth_config);
            if (synth_seed_set) config.seed = synth_seed;
            return aqua::cmd_synthesize(config, workers, force, verify_after);
        }
        if (rest->parsed()) {
            aqua::RestoreOptions options;
            options.input = rest_input;
            options.maps = rest_maps;
            options.output = rest_output;
            options.t_floor = t_floor;
            return aqua::cmd_restore(options, workers);
        }
        if (eval->parsed()) {
            aqua::EvaluateOptions options;
            options.predictions = eval_pred;
            options.reference = eval_ref;
            options.output = eval_output;
            options.strict = strict;
            if (eval_mode == "reference-free") {
                options.mode = aqua::EvalMode::ReferenceFree;
            } else if (eval_mode == "medium") {
                options.mode = aqua::EvalMode::Medium;
            } else {
                options.mode = aqua::EvalMode::FullReference;
            }
            return aqua::cmd_evaluate(options, workers);
        }
        if (verify->parsed()) {
            return aqua::cmd_verify(verify_manifest, map_tol);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return aqua::kExitError;
    }
    return aqua::kExitError;
}
