#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "image_io.hpp"
#include "metrics.hpp"
#include "serialize.hpp"
#include "synth.hpp"
#include "volume_io.hpp"
#include "warp_spec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace unireg;

namespace {

std::string binary() {
    const char* bin = std::getenv("UNIREG_BIN");
    REQUIRE(bin != nullptr);
    return bin;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("unireg_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct RunResult {
    int code;
    std::string out, err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

RunResult run(const std::string& args, const fs::path& scratch) {
    const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
    const std::string cmd =
        binary() + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

}  // namespace

TEST_CASE("missing input exits 3 and names the path") {
    const fs::path dir = fresh_dir("missing");
    const RunResult r = run("register --fixed " + (dir / "nope.png").string() + " --moving " +
                                (dir / "nope.png").string(),
                            dir);
    CHECK(r.code == 3);
    CHECK(r.err.find("nope.png") != std::string::npos);
}

TEST_CASE("invalid arguments exit 2") {
    const fs::path dir = fresh_dir("badargs");
    CHECK(run("register --fixed a.png --moving b.png --mode wobbly", dir).code == 2);
    CHECK(run("frobnicate", dir).code == 2);
    CHECK(run("synth --level 9 --out-dir " + dir.string(), dir).code == 2);
}

TEST_CASE("unknown config key exits 2") {
    const fs::path dir = fresh_dir("badcfg");
    save_image_png16((dir / "img.png").string(), random_texture({16, 16}, 1));
    std::ofstream(dir / "cfg.json") << R"({"epochs": 5, "warp_speed": 9})";
    const RunResult r = run("register --fixed " + (dir / "img.png").string() + " --moving " +
                                (dir / "img.png").string() + " --config " +
                                (dir / "cfg.json").string() + " --out-dir " + dir.string(),
                            dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("warp_speed") != std::string::npos);
}

TEST_CASE("registering identical images yields sub-half-pixel median displacement") {
    const fs::path dir = fresh_dir("identity");
    save_image_png16((dir / "img.png").string(), random_texture({24, 24}, 5));
    const RunResult r = run("register --fixed " + (dir / "img.png").string() + " --moving " +
                                (dir / "img.png").string() + " --epochs 120 --seed 3 --out-dir " +
                                (dir / "run").string() + " --json",
                            dir);
    REQUIRE(r.code == 0);
    const json summary = json::parse(r.out);
    CHECK(summary["median_displacement_px"].get<double>() < 0.5);
    CHECK(summary["epochs_run"].get<int>() == 120);

    // artifacts exist and the field agrees with the reported median
    CHECK(fs::exists(dir / "run" / "checkpoint.ureg"));
    CHECK(fs::exists(dir / "run" / "loss.csv"));
    const DisplacementField field = load_displacement_field((dir / "run" / "field.dspf").string());
    CHECK(field.extents == std::vector<int>{24, 24});
}

TEST_CASE("synth is seed-deterministic and levels order by magnitude") {
    const fs::path dir = fresh_dir("synth");
    const std::string common = " --count 2 --seed 11 --size 40 40 --out-dir ";
    REQUIRE(run("synth --level 2" + common + (dir / "a").string(), dir).code == 0);
    REQUIRE(run("synth --level 2" + common + (dir / "b").string(), dir).code == 0);
    for (const char* name :
         {"pair_000_fixed.png", "pair_000_transformed.png", "pair_000_warp.json",
          "pair_001_fixed.png"})
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));

    // identity preset reproduces fixed == transformed
    REQUIRE(run("synth --level 0 --seed 4 --size 32 32 --out-dir " + (dir / "id").string(), dir)
                .code == 0);
    CHECK(slurp(dir / "id" / "pair_000_fixed.png") ==
          slurp(dir / "id" / "pair_000_transformed.png"));

    // mean ground-truth corner displacement strictly increases with level
    const PointMap identity = [](const std::vector<double>& p) { return p; };
    double prev = -1.0;
    for (int level = 1; level <= 4; ++level) {
        const fs::path ldir = dir / ("level" + std::to_string(level));
        REQUIRE(run("synth --level " + std::to_string(level) + " --count 5 --seed 11 " +
                        "--size 40 40 --out-dir " + ldir.string(),
                    dir)
                    .code == 0);
        double mean = 0.0;
        for (int i = 0; i < 5; ++i) {
            char name[48];
            std::snprintf(name, sizeof(name), "pair_%03d_warp.json", i);
            const GroundTruthWarp w = GroundTruthWarp::from_json(slurp(ldir / name));
            mean += corner_relative_distance(point_map_from_warp(w), identity, w.extents) / 5.0;
        }
        CHECK(mean > prev);
        prev = mean;
    }
}

TEST_CASE("warp with an identity field reproduces the input") {
    const fs::path dir = fresh_dir("warp");
    const ScalarField img = random_texture({20, 20}, 8);
    save_image_png16((dir / "img.png").string(), img);
    save_displacement_field((dir / "zero.dspf").string(), DisplacementField({20, 20}, 2));

    REQUIRE(run("warp --field " + (dir / "zero.dspf").string() + " --input " +
                    (dir / "img.png").string() + " --out " + (dir / "out.png").string(),
                dir)
                .code == 0);
    CHECK(slurp(dir / "out.png") == slurp(dir / "img.png"));

    // linear interpolation on labels is rejected with exit 2
    LabelField labels({20, 20});
    labels.at({5, 5}) = 1;
    save_volume_raw((dir / "labels").string(), labels);
    CHECK(run("warp --field " + (dir / "zero.dspf").string() + " --input " +
                  (dir / "labels.json").string() + " --interp linear --out " +
                  (dir / "warped").string(),
              dir)
              .code == 2);
    CHECK(run("warp --field " + (dir / "zero.dspf").string() + " --input " +
                  (dir / "labels.json").string() + " --interp nearest --out " +
                  (dir / "warped").string(),
              dir)
              .code == 0);
}

TEST_CASE("eval corner aggregates match hand computation") {
    const fs::path dir = fresh_dir("eval");
    const fs::path results = dir / "results", truth = dir / "truth";
    fs::create_directories(results);
    fs::create_directories(truth);

    // three pairs on a 50x50 grid: estimated fields are zero, ground truths
    // translate by 0, 1 and 3 px -> corner distances 0, 2, 6 (percent of 50)
    const std::vector<double> shifts = {0.0, 1.0, 3.0};
    for (int i = 0; i < 3; ++i) {
        char name[48];
        std::snprintf(name, sizeof(name), "pair_%03d_field.dspf", i);
        save_displacement_field((results / name).string(), DisplacementField({50, 50}, 2));
        GroundTruthWarp w;
        w.kind = GroundTruthWarp::Kind::rigid;
        w.extents = {50, 50};
        w.spacing = {1.0, 1.0};
        w.translation_px = {0.0, shifts[i]};
        std::snprintf(name, sizeof(name), "pair_%03d_warp.json", i);
        std::ofstream(truth / name) << w.to_json();
    }
    const RunResult r = run("eval --results-dir " + results.string() + " --truth-dir " +
                                truth.string() + " --protocol corner --json",
                            dir);
    REQUIRE(r.code == 0);
    const json agg = json::parse(r.out);
    // distances {0, 2, 6}: mean 8/3, population std sqrt(56/9), success 1/3 (strict <2)
    CHECK(agg["mean"].get<double>() == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    CHECK(agg["stddev"].get<double>() == doctest::Approx(std::sqrt(56.0 / 9.0)).epsilon(1e-12));
    CHECK(agg["success_rate"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(fs::exists(results / "per_pair.csv"));
    CHECK(fs::exists(results / "aggregate.json"));

    // pair-count mismatch exits 2
    fs::remove(truth / "pair_002_warp.json");
    CHECK(run("eval --results-dir " + results.string() + " --truth-dir " + truth.string(), dir)
              .code == 2);
}

TEST_CASE("report emits deterministic artifacts from a run directory") {
    const fs::path dir = fresh_dir("report");
    save_image_png16((dir / "img.png").string(), random_texture({24, 24}, 9));
    REQUIRE(run("register --fixed " + (dir / "img.png").string() + " --moving " +
                    (dir / "img.png").string() + " --epochs 30 --out-dir " +
                    (dir / "run").string(),
                dir)
                .code == 0);
    REQUIRE(run("report --run-dir " + (dir / "run").string() + " --out " + (dir / "rep1").string(),
                dir)
                .code == 0);
    REQUIRE(run("report --run-dir " + (dir / "run").string() + " --out " + (dir / "rep2").string(),
                dir)
                .code == 0);
    for (const char* name : {"loss.svg", "overlay.png", "checkerboard.png"}) {
        CHECK(fs::exists(dir / "rep1" / name));
        CHECK(slurp(dir / "rep1" / name) == slurp(dir / "rep2" / name));
    }
    // one <circle> marker per epoch in the loss curve
    const std::string svg = slurp(dir / "rep1" / "loss.svg");
    size_t points = 0;
    for (size_t pos = svg.find("<circle"); pos != std::string::npos;
         pos = svg.find("<circle", pos + 1))
        ++points;
    CHECK(points == 30);

    // missing artifacts exit 3
    CHECK(run("report --run-dir " + (dir / "nonexistent").string(), dir).code == 3);
}

TEST_CASE("register is deterministic across invocations") {
    const fs::path dir = fresh_dir("determinism");
    save_image_png16((dir / "img.png").string(), random_texture({16, 16}, 13));
    const std::string base = "register --fixed " + (dir / "img.png").string() + " --moving " +
                             (dir / "img.png").string() + " --epochs 25 --seed 6 --out-dir ";
    REQUIRE(run(base + (dir / "r1").string(), dir).code == 0);
    REQUIRE(run(base + (dir / "r2").string(), dir).code == 0);
    CHECK(slurp(dir / "r1" / "checkpoint.ureg") == slurp(dir / "r2" / "checkpoint.ureg"));
    CHECK(slurp(dir / "r1" / "loss.csv") == slurp(dir / "r2" / "loss.csv"));
    CHECK(slurp(dir / "r1" / "field.dspf") == slurp(dir / "r2" / "field.dspf"));
}
