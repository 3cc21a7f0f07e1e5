// unireg: pairwise registration with untrained coordinate networks.
//
// Exit codes: 0 success, 2 invalid arguments, 3 I/O failure,
// 4 numerical abort (non-finite loss).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "image_io.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "report.hpp"
#include "serialize.hpp"
#include "synth.hpp"
#include "trainer.hpp"
#include "volume_io.hpp"
#include "warp_spec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace unireg;

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_image_path(const std::string& path) {
    return ends_with(path, ".png") || ends_with(path, ".pgm");
}

ScalarField load_scalar(const std::string& path) {
    if (is_image_path(path)) return load_image_2d(path);
    Volume v = load_volume(path);
    if (v.kind != Volume::Kind::scalar)
        throw std::invalid_argument(path + ": expected a scalar volume, got labels");
    return v.scalar;
}

void save_scalar(const std::string& path, const ScalarField& field) {
    if (ends_with(path, ".png")) {
        save_image_png16(path, field);
    } else if (ends_with(path, ".pgm")) {
        save_image_pgm(path, field);
    } else {
        std::string stem = path;
        if (ends_with(stem, ".raw")) stem.resize(stem.size() - 4);
        save_volume_raw(stem, field);
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& scope) {
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end())
            throw std::invalid_argument("unknown config key '" + scope + key + "'");
    }
}

void apply_grid_json(HashGridConfig& grid, const json& j, const std::string& scope) {
    reject_unknown(j, {"levels", "features_per_level", "table_size", "base_resolution",
                       "finest_resolution"},
                   scope);
    if (j.contains("levels")) grid.levels = j["levels"].get<int>();
    if (j.contains("features_per_level")) grid.features_per_level = j["features_per_level"].get<int>();
    if (j.contains("table_size")) grid.table_size = j["table_size"].get<int>();
    if (j.contains("base_resolution")) grid.base_resolution = j["base_resolution"].get<int>();
    if (j.contains("finest_resolution")) grid.finest_resolution = j["finest_resolution"].get<int>();
}

void apply_config_json(RunConfig& cfg, const json& j) {
    reject_unknown(j,
                   {"epochs", "target_epoch", "batch_size", "steps_per_epoch", "seed",
                    "deterministic", "schedule_enabled", "schedule_motion", "schedule_image",
                    "motion_hidden", "image_hidden", "motion_lr", "image_lr",
                    "displacement_scale", "motion_grid", "image_grid", "early_stop"},
                   "");
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
    if (j.contains("target_epoch")) cfg.target_epoch = j["target_epoch"].get<int>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("steps_per_epoch")) cfg.steps_per_epoch = j["steps_per_epoch"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    if (j.contains("deterministic")) cfg.deterministic = j["deterministic"].get<bool>();
    if (j.contains("schedule_enabled")) cfg.schedule_enabled = j["schedule_enabled"].get<bool>();
    if (j.contains("schedule_motion")) cfg.schedule_motion = j["schedule_motion"].get<bool>();
    if (j.contains("schedule_image")) cfg.schedule_image = j["schedule_image"].get<bool>();
    if (j.contains("motion_hidden")) cfg.motion_hidden = j["motion_hidden"].get<std::vector<int>>();
    if (j.contains("image_hidden")) cfg.image_hidden = j["image_hidden"].get<std::vector<int>>();
    if (j.contains("motion_lr")) cfg.motion_lr = j["motion_lr"].get<double>();
    if (j.contains("image_lr")) cfg.image_lr = j["image_lr"].get<double>();
    if (j.contains("displacement_scale"))
        cfg.displacement_scale = j["displacement_scale"].get<double>();
    if (j.contains("motion_grid")) apply_grid_json(cfg.motion_grid, j["motion_grid"], "motion_grid.");
    if (j.contains("image_grid")) apply_grid_json(cfg.image_grid, j["image_grid"], "image_grid.");
    if (j.contains("early_stop")) {
        reject_unknown(j["early_stop"], {"window", "rel_tol"}, "early_stop.");
        EarlyStopConfig es;
        if (j["early_stop"].contains("window")) es.window = j["early_stop"]["window"].get<int>();
        if (j["early_stop"].contains("rel_tol"))
            es.rel_tol = j["early_stop"]["rel_tol"].get<double>();
        cfg.early_stop = es;
    }
}

double median_displacement_px(const DisplacementField& field) {
    const int d = field.components;
    std::vector<double> mags;
    mags.reserve(field.values.size() / d);
    for (long i = 0; i < static_cast<long>(field.values.size()) / d; ++i) {
        double m2 = 0.0;
        for (int a = 0; a < d; ++a) m2 += field.at(i)[a] * field.at(i)[a];
        mags.push_back(std::sqrt(m2));
    }
    std::sort(mags.begin(), mags.end());
    return mags.empty() ? 0.0 : mags[mags.size() / 2];
}

std::string pair_name(int index, const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "pair_%03d_%s", index, suffix);
    return buf;
}

// Sorted paths in `dir` whose filename ends with `suffix`.
std::vector<std::string> list_with_suffix(const std::string& dir, const std::string& suffix) {
    if (!fs::is_directory(dir)) throw std::runtime_error(dir + ": not a directory");
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && ends_with(entry.path().filename().string(), suffix))
            out.push_back(entry.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

struct RegisterArgs {
    std::string fixed_path, moving_path, mode = "rigid", modality = "single";
    std::string config_path, out_dir = ".";
    uint64_t seed = 1;
    int epochs = 0, target_epoch = 0;
    bool limit_capacity = false;
    bool emit_json = false;
};

int cmd_register(const RegisterArgs& args) {
    const ScalarField fixed = normalize_intensity(load_scalar(args.fixed_path));
    const ScalarField moving = normalize_intensity(load_scalar(args.moving_path));

    RunConfig cfg = default_run_config(
        args.mode == "rigid" ? Granularity::rigid : Granularity::deformable,
        args.modality == "single" ? Modality::single : Modality::multi);
    if (!args.config_path.empty()) apply_config_json(cfg, json::parse(read_text(args.config_path)));
    if (args.seed != 1) cfg.seed = args.seed;
    if (args.epochs > 0) cfg.epochs = args.epochs;
    if (args.target_epoch > 0) cfg.target_epoch = args.target_epoch;
    if (args.limit_capacity) cfg = capacity_restricted_preset(cfg, fixed.extents);

    fs::create_directories(args.out_dir);
    const RegistrationResult result = register_pair(fixed, moving, cfg);
    const fs::path out(args.out_dir);

    save_checkpoint((out / "checkpoint.ureg").string(),
                    Checkpoint{result.model, result.epochs_run,
                               result.resolved_config.target_epoch,
                               result.resolved_config.schedule_enabled});
    save_displacement_field((out / "field.dspf").string(), result.field);
    save_loss_csv((out / "loss.csv").string(), result.loss_history);
    if (fixed.dim() == 2) {
        save_image_png16((out / "fixed.png").string(), fixed);
        save_image_png16((out / "transformed.png").string(), moving);
    } else {
        save_volume_raw((out / "fixed").string(), fixed);
        save_volume_raw((out / "transformed").string(), moving);
    }

    const LossTerms final_loss = result.loss_history.back();
    json summary = {
        {"fixed", args.fixed_path},
        {"moving", args.moving_path},
        {"mode", args.mode},
        {"modality", args.modality},
        {"seed", result.resolved_config.seed},
        {"epochs_run", result.epochs_run},
        {"target_epoch", result.resolved_config.target_epoch},
        {"wall_seconds", result.wall_seconds},
        {"extents", fixed.extents},
        {"final_loss",
         {{"fixed_term", final_loss.fixed_term},
          {"trans_term", final_loss.trans_term},
          {"total", final_loss.total()}}},
        {"median_displacement_px", median_displacement_px(result.field)},
    };
    write_text((out / "summary.json").string(), summary.dump(2) + "\n");
    if (args.emit_json) std::cout << summary.dump() << "\n";
    return 0;
}

struct SynthArgs {
    int level = 0;  // 0 = identity rigid warp
    std::string rbf_spec;  // "amplitude_px:bandwidth_px"
    std::string modality = "single";
    uint64_t seed = 1;
    std::string out_dir = ".";
    int count = 1;
    std::vector<int> size = {64, 64};
    double noise = 0.0;
    int labels = 0;
};

GroundTruthWarp synth_warp(const SynthArgs& args, uint64_t seed) {
    if (!args.rbf_spec.empty()) {
        const size_t colon = args.rbf_spec.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("--rbf expects amplitude_px:bandwidth_px");
        double amp = 0.0, bw = 0.0;
        try {
            amp = std::stod(args.rbf_spec.substr(0, colon));
            bw = std::stod(args.rbf_spec.substr(colon + 1));
        } catch (const std::exception&) {
            throw std::invalid_argument("--rbf expects amplitude_px:bandwidth_px");
        }
        if (bw <= 0.0) throw std::invalid_argument("--rbf bandwidth must be positive");
        const int d = static_cast<int>(args.size.size());
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        GroundTruthWarp w;
        w.kind = GroundTruthWarp::Kind::rbf;
        w.extents = args.size;
        w.spacing.assign(d, 1.0);
        GroundTruthWarp::Bump bump;
        bump.center_px.resize(d);
        bump.amplitude_px.assign(d, 0.0);
        for (int a = 0; a < d; ++a) bump.center_px[a] = 0.5 * (args.size[a] - 1);
        // random unit direction scaled to the requested amplitude
        double norm2 = 0.0;
        for (int a = 0; a < d; ++a) {
            bump.amplitude_px[a] = 2.0 * unit(rng) - 1.0;
            norm2 += bump.amplitude_px[a] * bump.amplitude_px[a];
        }
        const double norm = std::sqrt(std::max(norm2, 1e-12));
        for (int a = 0; a < d; ++a) bump.amplitude_px[a] *= amp / norm;
        bump.bandwidth_px = bw;
        w.bumps.push_back(bump);
        return w;
    }
    if (args.level == 0) {
        GroundTruthWarp w;
        w.kind = GroundTruthWarp::Kind::rigid;
        w.extents = args.size;
        w.spacing.assign(args.size.size(), 1.0);
        w.translation_px.assign(args.size.size(), 0.0);
        return w;
    }
    return rigid_level_preset(args.level, args.size, seed);
}

int cmd_synth(const SynthArgs& args) {
    if (args.level < 0 || args.level > 4) throw std::invalid_argument("--level must be in 0..4");
    if (args.count < 1) throw std::invalid_argument("--count must be >= 1");
    for (int e : args.size)
        if (e < 2) throw std::invalid_argument("--size extents must be >= 2");
    const PairModality modality =
        args.modality == "multi" ? PairModality::remap : PairModality::same;

    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    for (int i = 0; i < args.count; ++i) {
        const uint64_t seed = args.seed + static_cast<uint64_t>(i);
        const GroundTruthWarp warp = synth_warp(args, seed);
        const PairSample pair = generate_pair(warp, seed, modality, args.noise);
        if (static_cast<int>(args.size.size()) == 2) {
            save_image_png16((out / pair_name(i, "fixed.png")).string(), pair.fixed);
            save_image_png16((out / pair_name(i, "transformed.png")).string(), pair.transformed);
        } else {
            save_volume_raw((out / pair_name(i, "fixed")).string(), pair.fixed);
            save_volume_raw((out / pair_name(i, "transformed")).string(), pair.transformed);
        }
        write_text((out / pair_name(i, "warp.json")).string(), warp.to_json() + "\n");
        if (args.labels > 0)
            save_volume_raw((out / pair_name(i, "labels")).string(),
                            ellipsoid_labels(args.size, seed, args.labels));
    }
    return 0;
}

struct EvalArgs {
    std::string results_dir, truth_dir, protocol = "corner";
    double threshold = 2.0;
    bool emit_json = false;
};

int cmd_eval(const EvalArgs& args) {
    const auto fields = list_with_suffix(args.results_dir, "field.dspf");
    const auto warps = list_with_suffix(args.truth_dir, "warp.json");
    if (fields.size() != warps.size())
        throw std::invalid_argument("pair count mismatch: " + std::to_string(fields.size()) +
                                    " result fields vs " + std::to_string(warps.size()) +
                                    " ground-truth warps");
    if (fields.empty()) throw std::invalid_argument("no pairs found");

    const fs::path out(args.results_dir);
    std::ofstream csv((out / "per_pair.csv").string());
    if (!csv) throw std::runtime_error("cannot write per_pair.csv");
    json agg;
    agg["protocol"] = args.protocol;
    agg["count"] = fields.size();

    if (args.protocol == "corner") {
        csv << "pair,corner_relative_distance\n";
        std::vector<double> distances;
        for (size_t i = 0; i < fields.size(); ++i) {
            const DisplacementField field = load_displacement_field(fields[i]);
            const GroundTruthWarp truth = GroundTruthWarp::from_json(read_text(warps[i]));
            const double d = corner_relative_distance(point_map_from_field(field),
                                                      point_map_from_warp(truth), field.extents);
            distances.push_back(d);
            csv << i << "," << d << "\n";
        }
        const Aggregate a = aggregate(distances);
        agg["threshold"] = args.threshold;
        agg["success_rate"] = success_rate(distances, args.threshold);
        agg["mean"] = a.mean;
        agg["stddev"] = a.stddev;
    } else if (args.protocol == "labels") {
        const auto label_files = list_with_suffix(args.truth_dir, "labels.json");
        if (label_files.size() != fields.size())
            throw std::invalid_argument("pair count mismatch: " + std::to_string(fields.size()) +
                                        " result fields vs " + std::to_string(label_files.size()) +
                                        " label volumes");
        csv << "pair,dsc,weighted_dsc,hd95\n";
        std::vector<double> dscs, wdscs, hds;
        for (size_t i = 0; i < fields.size(); ++i) {
            const DisplacementField field = load_displacement_field(fields[i]);
            const GroundTruthWarp truth = GroundTruthWarp::from_json(read_text(warps[i]));
            const Volume vol = load_volume(label_files[i]);
            if (vol.kind != Volume::Kind::label)
                throw std::invalid_argument(label_files[i] + ": expected a label volume");
            const LabelField& fixed_labels = vol.label;

            // ground truth in the transformed frame: L_gt(x) = L_fix(T_gt(x))
            LabelField truth_labels(fixed_labels.extents);
            truth_labels.spacing = fixed_labels.spacing;
            const int d = fixed_labels.dim();
            std::vector<int> idx(d, 0);
            std::vector<double> point(d);
            for (long lin = 0; lin < fixed_labels.count(); ++lin) {
                for (int a = 0; a < d; ++a) point[a] = idx[a];
                truth_labels.values[lin] = fixed_labels.sample_nearest(truth.map(point));
                for (int a = d - 1; a >= 0; --a) {
                    if (++idx[a] < fixed_labels.extents[a]) break;
                    idx[a] = 0;
                }
            }
            const LabelField predicted = warp_field(fixed_labels, field, Interp::nearest);

            int32_t max_label = 0;
            for (int32_t v : truth_labels.values) max_label = std::max(max_label, v);
            std::vector<double> per_label;
            std::vector<long> counts;
            for (int32_t l = 1; l <= max_label; ++l) {
                const long count = std::count(truth_labels.values.begin(),
                                              truth_labels.values.end(), l);
                if (count == 0) continue;
                per_label.push_back(dice_label(predicted, truth_labels, l));
                counts.push_back(count);
            }
            const double dsc = dice(predicted, truth_labels);
            const double wdsc = per_label.empty() ? 1.0 : weighted_dice(per_label, counts);
            const double hd = hd95(predicted, truth_labels, truth_labels.spacing);
            dscs.push_back(dsc);
            wdscs.push_back(wdsc);
            hds.push_back(hd);
            csv << i << "," << dsc << "," << wdsc << "," << hd << "\n";
        }
        const Aggregate da = aggregate(dscs), wa = aggregate(wdscs), ha = aggregate(hds);
        agg["dsc"] = {{"mean", da.mean}, {"stddev", da.stddev}};
        agg["weighted_dsc"] = {{"mean", wa.mean}, {"stddev", wa.stddev}};
        agg["hd95"] = {{"mean", ha.mean}, {"stddev", ha.stddev}};
    } else {
        throw std::invalid_argument("--protocol must be corner or labels");
    }

    write_text((out / "aggregate.json").string(), agg.dump(2) + "\n");
    if (args.emit_json) std::cout << agg.dump() << "\n";
    return 0;
}

struct WarpArgs {
    std::string field_path, checkpoint_path, input_path, out_path;
    std::string interp = "linear";
};

int cmd_warp(const WarpArgs& args) {
    if (args.field_path.empty() == args.checkpoint_path.empty())
        throw std::invalid_argument("exactly one of --field or --checkpoint is required");
    const Interp interp = args.interp == "nearest" ? Interp::nearest : Interp::linear;

    Volume input;
    if (is_image_path(args.input_path)) {
        input.kind = Volume::Kind::scalar;
        input.scalar = load_image_2d(args.input_path);
    } else {
        input = load_volume(args.input_path);
    }
    const std::vector<int>& extents =
        input.kind == Volume::Kind::scalar ? input.scalar.extents : input.label.extents;

    DisplacementField field;
    if (!args.field_path.empty()) {
        field = load_displacement_field(args.field_path);
    } else {
        const Checkpoint ckpt = load_checkpoint(args.checkpoint_path);
        field = export_displacement_field(ckpt.model, extents,
                                          LevelWeights::ones(ckpt.model.motion_grid_config.levels));
    }

    if (input.kind == Volume::Kind::scalar) {
        save_scalar(args.out_path, warp_field(input.scalar, field, interp));
    } else {
        const LabelField warped = warp_field(input.label, field, interp);
        std::string stem = args.out_path;
        if (ends_with(stem, ".raw")) stem.resize(stem.size() - 4);
        save_volume_raw(stem, warped);
    }
    return 0;
}

struct ReportArgs {
    std::string run_dir, out_dir;
};

int cmd_report(const ReportArgs& args) {
    const fs::path run(args.run_dir);
    const fs::path out(args.out_dir.empty() ? args.run_dir : args.out_dir);
    fs::create_directories(out);

    const auto history = load_loss_csv((run / "loss.csv").string());
    const DisplacementField field = load_displacement_field((run / "field.dspf").string());

    const auto load_run_scalar = [&](const char* stem) {
        const fs::path png = run / (std::string(stem) + ".png");
        if (fs::exists(png)) return load_image_2d(png.string());
        Volume v = load_volume((run / (std::string(stem) + ".json")).string());
        if (v.kind != Volume::Kind::scalar)
            throw std::runtime_error(std::string(stem) + ": expected a scalar volume");
        return v.scalar;
    };
    const ScalarField fixed = load_run_scalar("fixed");
    const ScalarField transformed = load_run_scalar("transformed");

    write_loss_svg((out / "loss.svg").string(), history);
    const ScalarField warped = warp_field(fixed, field, Interp::linear);
    write_overlay_png((out / "overlay.png").string(), middle_slice(transformed),
                      middle_slice(warped));
    save_image_png16((out / "checkerboard.png").string(),
                     checkerboard(middle_slice(warped), middle_slice(transformed)));
    return 0;
}

template <typename Fn>
int run_guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const NumericalAbort& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"unireg: pairwise image registration with untrained coordinate networks"};
    app.require_subcommand(1);

    RegisterArgs reg;
    CLI::App* reg_cmd = app.add_subcommand("register", "Optimize a registration for one pair");
    reg_cmd->add_option("--fixed", reg.fixed_path, "Fixed image/volume")->required();
    reg_cmd->add_option("--moving", reg.moving_path, "Transformed (moving) image/volume")
        ->required();
    reg_cmd->add_option("--mode", reg.mode, "Motion granularity (default rigid)")
        ->check(CLI::IsMember({"rigid", "deformable"}));
    reg_cmd->add_option("--modality", reg.modality, "Pair modality (default single)")
        ->check(CLI::IsMember({"single", "multi"}));
    reg_cmd->add_option("--config", reg.config_path, "JSON run configuration");
    reg_cmd->add_option("--out-dir", reg.out_dir, "Output directory (default .)");
    reg_cmd->add_option("--seed", reg.seed, "RNG seed (default 1)");
    reg_cmd->add_option("--epochs", reg.epochs, "Epoch count (default 500 for 2D, 300 for 3D)");
    reg_cmd->add_option("--target-epoch", reg.target_epoch,
                        "Coarse-to-fine target epoch e_g (default 0.4 * epochs)");
    reg_cmd->add_flag("--limit-capacity", reg.limit_capacity,
                      "Cap the image grid at max extent / 15");
    reg_cmd->add_flag("--json", reg.emit_json, "Print the summary JSON on stdout");

    SynthArgs synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate synthetic ground-truth pairs");
    synth_cmd->add_option("--level", synth.level,
                          "Rigid motion level 1..4 (0 = identity; default 0)");
    synth_cmd->add_option("--rbf", synth.rbf_spec,
                          "Deformable warp spec amplitude_px:bandwidth_px");
    synth_cmd->add_option("--modality", synth.modality,
                          "single, or multi for the pseudo-modality remap")
        ->check(CLI::IsMember({"single", "multi"}));
    synth_cmd->add_option("--seed", synth.seed, "RNG seed (default 1); pair i uses seed + i");
    synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory (default .)");
    synth_cmd->add_option("--count", synth.count, "Number of pairs (default 1)");
    synth_cmd->add_option("--size", synth.size, "Extents, slowest axis first (default 64 64)");
    synth_cmd->add_option("--noise", synth.noise, "Gaussian noise sigma (default 0)");
    synth_cmd->add_option("--labels", synth.labels,
                          "Also write this many ellipsoid labels per pair (default 0)");

    EvalArgs eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Score result fields against ground truth");
    eval_cmd->add_option("--results-dir", eval.results_dir, "Directory with *field.dspf files")
        ->required();
    eval_cmd->add_option("--truth-dir", eval.truth_dir, "Directory with *warp.json files")
        ->required();
    eval_cmd->add_option("--protocol", eval.protocol, "corner or labels (default corner)")
        ->check(CLI::IsMember({"corner", "labels"}));
    eval_cmd->add_option("--threshold", eval.threshold,
                         "Corner success threshold in percent (default 2)");
    eval_cmd->add_flag("--json", eval.emit_json, "Print the aggregate JSON on stdout");

    WarpArgs warp;
    CLI::App* warp_cmd = app.add_subcommand("warp", "Apply a displacement field to an input");
    warp_cmd->add_option("--field", warp.field_path, "Displacement field (.dspf)");
    warp_cmd->add_option("--checkpoint", warp.checkpoint_path,
                         "Checkpoint to export the field from");
    warp_cmd->add_option("--input", warp.input_path, "Image or volume to warp")->required();
    warp_cmd->add_option("--interp", warp.interp,
                         "linear or nearest (default linear; labels require nearest)")
        ->check(CLI::IsMember({"linear", "nearest"}));
    warp_cmd->add_option("--out", warp.out_path, "Output path")->required();

    ReportArgs report;
    CLI::App* report_cmd = app.add_subcommand("report", "Render loss curve and overlays for a run");
    report_cmd->add_option("--run-dir", report.run_dir, "Completed run directory")->required();
    report_cmd->add_option("--out", report.out_dir, "Output directory (default: the run dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (reg_cmd->parsed()) return run_guarded([&] { return cmd_register(reg); });
    if (synth_cmd->parsed()) return run_guarded([&] { return cmd_synth(synth); });
    if (eval_cmd->parsed()) return run_guarded([&] { return cmd_eval(eval); });
    if (warp_cmd->parsed()) return run_guarded([&] { return cmd_warp(warp); });
    if (report_cmd->parsed()) return run_guarded([&] { return cmd_report(report); });
    return 2;
}
