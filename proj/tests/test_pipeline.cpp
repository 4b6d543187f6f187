#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "aqua/config.hpp"
#include "aqua/errors.hpp"
#include "aqua/image_io.hpp"
#include "aqua/manifest.hpp"
#include "aqua/metrics.hpp"
#include "aqua/pipeline.hpp"
#include "aqua/report.hpp"
#include "aqua/rng.hpp"
#include "support/fixtures.hpp"

using namespace aqua;
using aqua::test::TempDir;

namespace fs = std::filesystem;

namespace {

LibraryConfig make_library_config(const TempDir& tmp, int corpus_size, int k = 4) {
    LibraryConfig config;
    config.images = tmp.path / "sea";
    config.output = tmp.path / "light_library.json";
    config.ulap_coefficients = aqua::test::data_dir() / "ulap_coefficients.json";
    config.k = k;
    config.seed = 11;
    config.far_fraction = 0.02;
    aqua::test::write_underwater_corpus(config.images, corpus_size, 48, 32, 500);
    return config;
}

/// Fixture dataset: corpus + library + synthesis config rooted in tmp.
SynthesisConfig make_synthesis_config(const TempDir& tmp, int images, int samples_per_image,
                                      int width = 33, int height = 25, double depth_hi = 3.0) {
    LibraryConfig lib = make_library_config(tmp, 6);
    REQUIRE(cmd_build_library(lib, 2) == kExitOk);

    SynthesisConfig config;
    config.images = tmp.path / "clean";
    config.depths = tmp.path / "depth";
    config.output = tmp.path / "dataset";
    config.library = lib.output;
    config.jerlov_table = aqua::test::data_dir() / "water_types.csv";
    config.seed = 2718;
    config.jitter = 0.15;
    config.samples_per_image = samples_per_image;
    aqua::test::write_fixture_corpus(config.images, config.depths, images, width, height, 900,
                                     0.3, depth_hi);
    return config;
}

std::vector<std::string> csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    return cells;
}

/// metric name -> {count, finite_count, mean, median, stddev} from summary.csv.
std::map<std::string, std::vector<std::string>> parse_summary_csv(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::map<std::string, std::vector<std::string>> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            CHECK(line == "metric,count,finite_count,mean,median,stddev");
            continue;
        }
        const std::vector<std::string> cells = csv_row(line);
        REQUIRE(cells.size() >= 3);
        rows[cells[0]] = cells;
    }
    return rows;
}

} // namespace

TEST_CASE("synthesis config loads from json with defaults and validation") {
    TempDir tmp;
    const fs::path path = tmp.path / "config.json";
    atomic_write_text(path, R"({
        "images": "in/img", "depths": "in/depth", "output": "out",
        "library": "lib.json", "water_types": "water.csv",
        "seed": 7, "jitter": 0.2, "samples_per_image": 3,
        "depth_policy": "repair", "size_policy": "none"
    })");
    const SynthesisConfig config = load_synthesis_config(path);
    CHECK(config.images == fs::path("in/img"));
    CHECK(config.seed == 7);
    CHECK(config.jitter == 0.2);
    CHECK(config.samples_per_image == 3);
    CHECK(config.depth_policy == DepthPolicy::Repair);
    CHECK(config.size_policy == "none");
    CHECK(config.rails.beta_min == 0.01);
    CHECK(config.rails.beta_max == 6.0);
    CHECK(config.thresholds.t_floor == 0.02);
    CHECK(config.max_attempts == 10);

    atomic_write_text(path, R"({"images": "a", "depths": "b", "output": "c"})");
    CHECK_THROWS_AS((void)load_synthesis_config(path), DecodeError);

    atomic_write_text(path, R"({
        "images": "a", "depths": "b", "output": "c", "library": "l", "water_types": "w",
        "jitter": 0.7
    })");
    CHECK_THROWS_AS((void)load_synthesis_config(path), ValidationError);

    atomic_write_text(path, R"({
        "images": "a", "depths": "b", "output": "c", "library": "l", "water_types": "w",
        "depth_policy": "guess"
    })");
    CHECK_THROWS_AS((void)load_synthesis_config(path), ValidationError);
}

TEST_CASE("library config loads and validates") {
    TempDir tmp;
    const fs::path path = tmp.path / "lib_config.json";
    atomic_write_text(path, R"({
        "images": "sea", "output": "lib.json", "ulap_coefficients": "ulap.json",
        "k": 6, "seed": 12, "far_fraction": 0.01
    })");
    const LibraryConfig config = load_library_config(path);
    CHECK(config.k == 6);
    CHECK(config.seed == 12);
    CHECK(config.far_fraction == 0.01);

    atomic_write_text(path, R"({
        "images": "sea", "output": "lib.json", "ulap_coefficients": "ulap.json",
        "far_fraction": 0.0
    })");
    CHECK_THROWS_AS((void)load_library_config(path), ValidationError);
}

TEST_CASE("library build is deterministic and reports its shape") {
    TempDir tmp;
    const LibraryConfig config = make_library_config(tmp, 20, 10);
    RunStats stats;
    REQUIRE(cmd_build_library(config, 4, &stats) == kExitOk);
    CHECK(stats.processed == 20);
    CHECK(stats.skipped == 0);

    const BackgroundLightLibrary lib = load_light_library(config.output);
    CHECK(lib.entries.size() == 20);
    CHECK(lib.k == 10);
    CHECK_FALSE(lib.reduced_k);
    CHECK(lib.source_hashes.size() == 20);

    const std::string first = read_text(config.output);
    REQUIRE(cmd_build_library(config, 1) == kExitOk);
    CHECK(read_text(config.output) == first);
}

TEST_CASE("library build shrinks k for small corpora and skips bad files") {
    TempDir tmp;
    LibraryConfig config = make_library_config(tmp, 5, 10);
    REQUIRE(cmd_build_library(config, 2) == kExitOk);
    CHECK(load_light_library(config.output).reduced_k);
    CHECK(load_light_library(config.output).k == 5);

    atomic_write_text(config.images / "sea_zzz.png", "garbage bytes, not a png");
    RunStats stats;
    CHECK(cmd_build_library(config, 2, &stats) == kExitPartial);
    CHECK(stats.skipped == 1);
    CHECK(stats.processed == 5);
    REQUIRE(stats.messages.size() == 1);
    CHECK(stats.messages[0].find("sea_zzz.png") != std::string::npos);

    LibraryConfig empty = config;
    empty.images = tmp.path / "nothing";
    fs::create_directories(empty.images);
    CHECK(cmd_build_library(empty, 2) == kExitError);
}

TEST_CASE("synthesis writes a complete, verifiable dataset") {
    TempDir tmp;
    const SynthesisConfig config = make_synthesis_config(tmp, 4, 2);
    RunStats stats;
    REQUIRE(cmd_synthesize(config, 2, false, false, &stats) == kExitOk);
    CHECK(stats.processed == 8);
    CHECK(stats.failed == 0);

    const DatasetManifest manifest = load_manifest(config.output / "manifest.json");
    REQUIRE(manifest.entries.size() == 8);
    CHECK(manifest.schema_version == 1);

    for (const ManifestEntry& entry : manifest.entries) {
        const SampleSidecar sidecar = sidecar_from_json(read_text(config.output / entry.sidecar));
        CHECK(sidecar.id == entry.id);
        CHECK(fs::exists(config.output / sidecar.underwater));
        CHECK(fs::exists(config.output / sidecar.clean));
        CHECK(fs::exists(config.output / sidecar.t_map));
        CHECK(fs::exists(config.output / sidecar.b_map));
        CHECK(fs::exists(config.output / sidecar.depth));
        CHECK(sidecar.stream_seed ==
              Rng::derive_stream(config.seed, entry.id.substr(0, entry.id.find("_s")),
                                 entry.id.back() - '0'));

        const EncodedImage uw = read_png(config.output / sidecar.underwater);
        CHECK(uw.bit_depth == 16);
        CHECK(uw.width == 32);  // 33 cropped to the 8-pixel grid
        CHECK(uw.height == 24); // 25 cropped likewise
        const DepthMap depth = read_pfm(config.output / sidecar.depth);
        CHECK(depth.width() == 32);
        CHECK(depth.height() == 24);
    }

    VerifyResult verdict;
    CHECK(cmd_verify(config.output / "manifest.json", 1e-6, &verdict) == kExitOk);
    CHECK(verdict.entries == 8);
    CHECK(verdict.failures == 0);
    CHECK(verdict.max_map_error <= 1e-6);
    CHECK(verdict.max_recon_error <= 5e-5);
}

TEST_CASE("synthesis is byte-identical across worker counts and output roots") {
    TempDir tmp;
    SynthesisConfig config = make_synthesis_config(tmp, 3, 2);
    SynthesisConfig serial = config;
    serial.output = tmp.path / "out_serial";
    SynthesisConfig parallel = config;
    parallel.output = tmp.path / "out_parallel";

    REQUIRE(cmd_synthesize(serial, 1, false) == kExitOk);
    REQUIRE(cmd_synthesize(parallel, 8, false) == kExitOk);

    CHECK(read_text(serial.output / "manifest.json") ==
          read_text(parallel.output / "manifest.json"));

    const DatasetManifest manifest = load_manifest(serial.output / "manifest.json");
    for (const ManifestEntry& entry : manifest.entries) {
        CHECK(read_text(serial.output / entry.sidecar) ==
              read_text(parallel.output / entry.sidecar));
        const SampleSidecar sidecar = sidecar_from_json(read_text(serial.output / entry.sidecar));
        CHECK(file_content_hash(serial.output / sidecar.underwater) ==
              file_content_hash(parallel.output / sidecar.underwater));
        CHECK(file_content_hash(serial.output / sidecar.t_map) ==
              file_content_hash(parallel.output / sidecar.t_map));
    }
}

TEST_CASE("an existing manifest is only overwritten with force") {
    TempDir tmp;
    const SynthesisConfig config = make_synthesis_config(tmp, 2, 1);
    REQUIRE(cmd_synthesize(config, 2, false) == kExitOk);
    RunStats stats;
    CHECK(cmd_synthesize(config, 2, false, false, &stats) == kExitError);
    REQUIRE(!stats.messages.empty());
    CHECK(stats.messages[0].find("--force") != std::string::npos);
    CHECK(cmd_synthesize(config, 2, true) == kExitOk);
}

TEST_CASE("images without depth pairs are skipped, not fatal") {
    TempDir tmp;
    const SynthesisConfig config = make_synthesis_config(tmp, 3, 2);
    fs::remove(config.depths / "img_001.pfm");
    RunStats stats;
    CHECK(cmd_synthesize(config, 2, false, false, &stats) == kExitPartial);
    CHECK(stats.skipped == 2);
    CHECK(stats.processed == 4);
    CHECK(load_manifest(config.output / "manifest.json").entries.size() == 4);
}

TEST_CASE("synthesize-then-verify catches tampered records") {
    TempDir tmp;
    const SynthesisConfig config = make_synthesis_config(tmp, 2, 1);
    REQUIRE(cmd_synthesize(config, 2, false) == kExitOk);

    // Swap one underwater image for a different one of the same size.
    const DatasetManifest manifest = load_manifest(config.output / "manifest.json");
    const SampleSidecar sidecar =
        sidecar_from_json(read_text(config.output / manifest.entries[0].sidecar));
    EncodedImage tampered = read_png(config.output / sidecar.underwater);
    for (auto& v : tampered.data) v = static_cast<std::uint16_t>(v ^ 0x2000);
    write_png(tampered, config.output / sidecar.underwater);

    VerifyResult verdict;
    CHECK(cmd_verify(config.output / "manifest.json", 1e-6, &verdict) == kExitError);
    CHECK(verdict.failures == 1);
    CHECK(verdict.entries == 2);
    CHECK(verdict.max_recon_error > 5e-5);
}

TEST_CASE("restoration from ground-truth maps recovers the clean image") {
    TempDir tmp;
    const SynthesisConfig config = make_synthesis_config(tmp, 3, 1, 41, 33, 2.5);
    REQUIRE(cmd_synthesize(config, 2, false) == kExitOk);

    RestoreOptions restore_opts;
    restore_opts.input = config.output;
    restore_opts.output = tmp.path / "restored";
    RunStats stats;
    REQUIRE(cmd_restore(restore_opts, 2, &stats) == kExitOk);
    CHECK(stats.processed == 3);

    EvaluateOptions eval;
    eval.predictions = restore_opts.output;
    eval.reference = config.output;
    eval.output = tmp.path / "scores";
    eval.mode = EvalMode::FullReference;
    REQUIRE(cmd_evaluate(eval, 2, &stats) == kExitOk);
    CHECK(stats.processed == 3);

    double psnr_sum = 0.0;
    const DatasetManifest manifest = load_manifest(config.output / "manifest.json");
    for (const ManifestEntry& entry : manifest.entries) {
        const ScoreReport report =
            score_report_from_json(read_text(eval.output / (entry.id + "_score.json")));
        REQUIRE(report.psnr.has_value());
        psnr_sum += *report.psnr;
        CHECK(*report.ssim > 0.99);
    }
    CHECK(psnr_sum / 3.0 >= 60.0);
}

TEST_CASE("identity maps restore the input unchanged") {
    TempDir tmp;
    Rng rng(3000);
    const fs::path input_dir = tmp.path / "in";
    const fs::path maps_dir = tmp.path / "maps";
    fs::create_directories(input_dir);
    fs::create_directories(maps_dir);
    const LinearImage img = aqua::test::structured_image(rng, 24, 16);
    write_png(linear_to_srgb(img, 16), input_dir / "scene.png");
    LinearImage ones(24, 16);
    for (std::size_t i = 0; i < ones.value_count(); ++i) ones.data()[i] = 1.0;
    write_exr(ones, maps_dir / "scene_T.exr");
    write_exr(LinearImage(24, 16), maps_dir / "scene_B.exr");

    RestoreOptions options;
    options.input = input_dir;
    options.maps = maps_dir;
    options.output = tmp.path / "out";
    REQUIRE(cmd_restore(options, 1) == kExitOk);

    const EncodedImage original = read_png(input_dir / "scene.png");
    const EncodedImage restored = read_png(options.output / "scene_restored.png");
    CHECK(restored.bit_depth == 16);
    CHECK(restored.data == original.data);

    const EncodedImage mask = read_png(options.output / "scene_mask.png");
    for (std::uint16_t v : mask.data) CHECK(v == 0);
}

TEST_CASE("a corrupt map fails its record and the run degrades to partial") {
    TempDir tmp;
    const SynthesisConfig config = make_synthesis_config(tmp, 3, 1);
    REQUIRE(cmd_synthesize(config, 2, false) == kExitOk);
    const DatasetManifest manifest = load_manifest(config.output / "manifest.json");
    const SampleSidecar sidecar =
        sidecar_from_json(read_text(config.output / manifest.entries[1].sidecar));
    atomic_write_text(config.output / sidecar.t_map, "junk");

    RestoreOptions options;
    options.input = config.output;
    options.output = tmp.path / "restored";
    RunStats stats;
    CHECK(cmd_restore(options, 2, &stats) == kExitPartial);
    CHECK(stats.processed == 2);
    CHECK(stats.failed == 1);
    CHECK(fs::exists(options.output / (manifest.entries[0].id + "_restored.png")));
    CHECK_FALSE(fs::exists(options.output / (manifest.entries[1].id + "_restored.png")));
}

TEST_CASE("evaluating a prediction against itself reports the sentinel") {
    TempDir tmp;
    const SynthesisConfig config = make_synthesis_config(tmp, 2, 1);
    REQUIRE(cmd_synthesize(config, 2, false) == kExitOk);
    const DatasetManifest manifest = load_manifest(config.output / "manifest.json");

    const fs::path preds = tmp.path / "preds";
    fs::create_directories(preds);
    for (const ManifestEntry& entry : manifest.entries) {
        const SampleSidecar sidecar =
            sidecar_from_json(read_text(config.output / entry.sidecar));
        fs::copy_file(config.output / sidecar.clean, preds / (entry.id + ".png"));
    }

    EvaluateOptions eval;
    eval.predictions = preds;
    eval.reference = config.output;
    eval.output = tmp.path / "scores";
    REQUIRE(cmd_evaluate(eval, 2) == kExitOk);

    for (const ManifestEntry& entry : manifest.entries) {
        const std::string text = read_text(eval.output / (entry.id + "_score.json"));
        CHECK(text.find("\"bitwise_equal\": true") != std::string::npos);
        const ScoreReport report = score_report_from_json(text);
        CHECK(std::isinf(*report.psnr));
        CHECK(*report.ssim == 1.0);
        CHECK(*report.l1 == 0.0);
    }

    const auto summary = parse_summary_csv(eval.output / "summary.csv");
    REQUIRE(summary.count("psnr") == 1);
    CHECK(summary.at("psnr")[1] == "2"); // count
    CHECK(summary.at("psnr")[2] == "0"); // finite_count
    CHECK(summary.at("psnr")[3] == "");  // no finite mean
    CHECK(summary.at("ssim")[3] == "1");
}

TEST_CASE("summary csv matches a recomputation from the per-image reports") {
    TempDir tmp;
    const SynthesisConfig config = make_synthesis_config(tmp, 4, 1);
    REQUIRE(cmd_synthesize(config, 2, false) == kExitOk);

    RestoreOptions restore_opts;
    restore_opts.input = config.output;
    restore_opts.output = tmp.path / "restored";
    REQUIRE(cmd_restore(restore_opts, 2) == kExitOk);

    EvaluateOptions eval;
    eval.predictions = restore_opts.output;
    eval.reference = config.output;
    eval.output = tmp.path / "scores";
    REQUIRE(cmd_evaluate(eval, 2) == kExitOk);

    const DatasetManifest manifest = load_manifest(config.output / "manifest.json");
    std::vector<double> psnrs, ssims, l1s;
    for (const ManifestEntry& entry : manifest.entries) {
        const ScoreReport r =
            score_report_from_json(read_text(eval.output / (entry.id + "_score.json")));
        psnrs.push_back(*r.psnr);
        ssims.push_back(*r.ssim);
        l1s.push_back(*r.l1);
    }
    auto mean = [](const std::vector<double>& v) {
        double sum = 0.0;
        for (double x : v) sum += x;
        return sum / static_cast<double>(v.size());
    };

    const auto summary = parse_summary_csv(eval.output / "summary.csv");
    CHECK(std::stod(summary.at("psnr")[3]) == doctest::Approx(mean(psnrs)).epsilon(1e-9));
    CHECK(std::stod(summary.at("ssim")[3]) == doctest::Approx(mean(ssims)).epsilon(1e-9));
    CHECK(std::stod(summary.at("l1")[3]) == doctest::Approx(mean(l1s)).epsilon(1e-9));
}

TEST_CASE("medium mode scores predicted maps against the dataset") {
    TempDir tmp;
    const SynthesisConfig config = make_synthesis_config(tmp, 2, 1);
    REQUIRE(cmd_synthesize(config, 2, false) == kExitOk);
    const DatasetManifest manifest = load_manifest(config.output / "manifest.json");

    const fs::path preds = tmp.path / "pred_maps";
    fs::create_directories(preds);
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const SampleSidecar sidecar =
            sidecar_from_json(read_text(config.output / manifest.entries[i].sidecar));
        LinearImage t = read_exr(config.output / sidecar.t_map);
        if (i == 1) {
            for (std::size_t v = 0; v < t.value_count(); ++v) t.data()[v] *= 0.9;
        }
        write_exr(t, preds / (manifest.entries[i].id + "_T.exr"));
        fs::copy_file(config.output / sidecar.b_map,
                      preds / (manifest.entries[i].id + "_B.exr"));
    }

    EvaluateOptions eval;
    eval.predictions = preds;
    eval.reference = config.output;
    eval.output = tmp.path / "scores";
    eval.mode = EvalMode::Medium;
    RunStats stats;
    REQUIRE(cmd_evaluate(eval, 2, &stats) == kExitOk);
    CHECK(stats.processed == 2);

    const ScoreReport exact = score_report_from_json(
        read_text(eval.output / (manifest.entries[0].id + "_score.json")));
    CHECK(std::isinf(*exact.psnr_t));
    CHECK(*exact.mae_t == 0.0);
    CHECK(std::isinf(*exact.psnr_b));

    const ScoreReport off = score_report_from_json(
        read_text(eval.output / (manifest.entries[1].id + "_score.json")));
    CHECK(std::isfinite(*off.psnr_t));
    CHECK(*off.mae_t > 0.0);
    CHECK(std::isinf(*off.psnr_b));
    CHECK_FALSE(off.psnr.has_value());
    CHECK_FALSE(off.uiqm.has_value());
}

TEST_CASE("reference-free mode scores bare directories") {
    TempDir tmp;
    Rng rng(3100);
    const fs::path dir = tmp.path / "imgs";
    fs::create_directories(dir);
    write_png(linear_to_srgb(aqua::test::structured_image(rng, 64, 48), 8), dir / "a.png");
    write_png(linear_to_srgb(aqua::test::structured_image(rng, 64, 48), 8), dir / "b.png");
    write_png(linear_to_srgb(aqua::test::structured_image(rng, 64, 48), 8),
              dir / "ignored_mask.png");

    EvaluateOptions eval;
    eval.predictions = dir;
    eval.output = tmp.path / "scores";
    eval.mode = EvalMode::ReferenceFree;
    RunStats stats;
    REQUIRE(cmd_evaluate(eval, 2, &stats) == kExitOk);
    CHECK(stats.processed == 2);
    CHECK(fs::exists(eval.output / "a_score.json"));
    CHECK(fs::exists(eval.output / "b_score.json"));
    CHECK_FALSE(fs::exists(eval.output / "ignored_mask_score.json"));
    const ScoreReport report = score_report_from_json(read_text(eval.output / "a_score.json"));
    REQUIRE(report.uiqm.has_value());
    CHECK_FALSE(report.psnr.has_value());
}

TEST_CASE("unmatched predictions are skipped, or fatal in strict mode") {
    TempDir tmp;
    const SynthesisConfig config = make_synthesis_config(tmp, 2, 1);
    REQUIRE(cmd_synthesize(config, 2, false) == kExitOk);
    const DatasetManifest manifest = load_manifest(config.output / "manifest.json");

    const fs::path preds = tmp.path / "preds";
    fs::create_directories(preds);
    const SampleSidecar sidecar =
        sidecar_from_json(read_text(config.output / manifest.entries[0].sidecar));
    fs::copy_file(config.output / sidecar.clean, preds / (manifest.entries[0].id + ".png"));
    fs::copy_file(config.output / sidecar.clean, preds / "stranger.png");

    EvaluateOptions eval;
    eval.predictions = preds;
    eval.reference = config.output;
    eval.output = tmp.path / "scores";
    RunStats stats;
    CHECK(cmd_evaluate(eval, 2, &stats) == kExitPartial);
    CHECK(stats.processed == 1);
    CHECK(stats.skipped == 1);

    eval.strict = true;
    eval.output = tmp.path / "scores_strict";
    CHECK(cmd_evaluate(eval, 2, &stats) == kExitError);
}

TEST_CASE("verify resolves a dataset root to its manifest") {
    TempDir tmp;
    const SynthesisConfig config = make_synthesis_config(tmp, 2, 1);
    REQUIRE(cmd_synthesize(config, 2, false) == kExitOk);
    VerifyResult from_root;
    CHECK(cmd_verify(config.output, 1e-6, &from_root) == kExitOk);
    CHECK(from_root.entries == 2);
    CHECK(cmd_verify(tmp.path / "nowhere", 1e-6) == kExitError);
}
