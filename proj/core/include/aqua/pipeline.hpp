#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aqua/config.hpp"
#include "aqua/metrics.hpp"

namespace aqua {

// Process exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;    // hard failure, nothing useful produced
inline constexpr int kExitPartial = 2;  // run finished but some entries were skipped

struct RunStats {
    int processed = 0;
    int skipped = 0;
    int failed = 0;
    std::vector<std::string> messages;  // one line per skipped/failed entry
};

/// Extract background lights from a corpus and write the clustered library.
/// Unreadable images are skipped with a warning; zero usable images is a
/// hard error.
int cmd_build_library(const LibraryConfig& config, int workers, RunStats* stats = nullptr);

/// Synthesize an underwater dataset: for every (image, depth, sample index)
/// triple, degrade, persist the record and append a manifest entry. Fully
/// deterministic for a fixed seed regardless of worker count. Refuses to
/// overwrite an existing manifest unless force is set.
int cmd_synthesize(const SynthesisConfig& config, int workers, bool force,
                   bool verify_after = false, RunStats* stats = nullptr);

struct RestoreOptions {
    std::filesystem::path input;  // dataset root (manifest.json) or directory of PNGs
    std::filesystem::path maps;   // directory of <stem>_T.exr/<stem>_B.exr when input has no sidecars
    std::filesystem::path output;
    double t_floor = 0.05;
};

/// Invert the formation model over a directory of images with known or
/// predicted medium maps. Floored-pixel masks are written alongside.
int cmd_restore(const RestoreOptions& options, int workers, RunStats* stats = nullptr);

enum class EvalMode { FullReference, ReferenceFree, Medium };

struct EvaluateOptions {
    std::filesystem::path predictions;  // directory of predicted images or _T/_B maps
    std::filesystem::path reference;    // gt directory or dataset manifest.json
    std::filesystem::path output;       // report directory
    EvalMode mode = EvalMode::FullReference;
    bool strict = false;                // unmatched filenames fail the run
    LossWeights weights;
};

/// Score predictions and write per-image JSON reports plus a summary CSV.
int cmd_evaluate(const EvaluateOptions& options, int workers, RunStats* stats = nullptr);

struct VerifyResult {
    int entries = 0;
    int failures = 0;
    double max_map_error = 0.0;   // recomputed T/B vs stored EXR
    double max_recon_error = 0.0; // reloaded underwater vs recomposed, linear domain
};

/// Reload every manifest entry and check that the persisted images still
/// satisfy the decomposition: T/B match the sidecar parameters and depth to
/// within map_tol, and the stored underwater image matches the recomposition
/// to within the 16-bit quantization bound.
int cmd_verify(const std::filesystem::path& manifest_path, double map_tol = 1e-6,
               VerifyResult* result = nullptr);

} // namespace aqua
