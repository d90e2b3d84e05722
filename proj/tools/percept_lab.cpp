// percept-lab: command-line front end for the observation-learning lab.
// Subcommands cover the whole pipeline: synthetic dataset generation,
// classifier pretraining, scripted demonstrations, reward-driven learning,
// correlation tables, reward profiles and control-sequence replay.
//
// Exit codes: 0 success, 1 usage error, 2 configuration/format error,
// 3 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "plab/clip_io.hpp"
#include "plab/config.hpp"
#include "plab/error.hpp"
#include "plab/harness.hpp"
#include "plab/learner.hpp"
#include "plab/render.hpp"
#include "plab/report.hpp"
#include "plab/reward.hpp"
#include "plab/sim.hpp"
#include "plab/train.hpp"
#include "plab/weights_io.hpp"

namespace {

namespace fs = std::filesystem;

struct CliOptions {
    std::string config_path;
    bool has_seed = false;
    std::uint64_t seed = 0;
};

plab::Config load_config(const CliOptions& opt) {
    if (opt.config_path.empty()) throw plab::UsageError("--config <file> is required");
    return plab::Config::load(opt.config_path);
}

plab::StyleRanges ranges_from_config(const plab::Config& cfg) {
    plab::StyleRanges r;
    r.zoom_lo = cfg.get_double("dataset.zoom_lo", r.zoom_lo);
    r.zoom_hi = cfg.get_double("dataset.zoom_hi", r.zoom_hi);
    r.geom_jitter = cfg.get_double("dataset.geom_jitter", r.geom_jitter);
    r.joint_jitter = cfg.get_double("dataset.joint_jitter", r.joint_jitter);
    r.clutter_prob = cfg.get_double("dataset.clutter_prob", r.clutter_prob);
    r.hand_prob = cfg.get_double("dataset.hand_prob", r.hand_prob);
    r.variant_prob = cfg.get_double("dataset.variant_prob", r.variant_prob);
    return r;
}

plab::EncoderConfig encoder_config_from(const plab::Config& cfg) {
    const std::string name = cfg.get_string("encoder.config", "desk");
    plab::EncoderConfig enc;
    if (name == "desk") enc = plab::EncoderConfig::desk();
    else if (name == "c3d_full") enc = plab::EncoderConfig::c3d_full();
    else throw plab::ConfigError("encoder.config: expected desk|c3d_full, got " + name);
    enc.num_classes = static_cast<int>(cfg.get_int("encoder.classes", plab::kNumTaskKinds));
    return enc;
}

void cmd_dataset(const CliOptions& opt) {
    const plab::Config cfg = load_config(opt);
    const std::uint64_t seed =
        opt.has_seed ? opt.seed : static_cast<std::uint64_t>(cfg.get_int("dataset.seed", 0));
    std::array<int, plab::kNumTaskKinds> per_class;
    const auto counts = cfg.get_doubles("dataset.per_class", {8.0});
    if (counts.size() == 1)
        per_class.fill(static_cast<int>(counts[0]));
    else if (counts.size() == plab::kNumTaskKinds)
        for (std::size_t i = 0; i < per_class.size(); ++i)
            per_class[i] = static_cast<int>(counts[i]);
    else
        throw plab::ConfigError("dataset.per_class: expected 1 or 5 counts");

    const plab::EncoderConfig enc = encoder_config_from(cfg);
    const std::string out = cfg.get_string("dataset.out", "dataset");
    const plab::SyntheticActivityDataset ds = plab::build_synthetic_dataset(
        per_class, ranges_from_config(cfg), seed, enc.input_h, enc.input_w, enc.input_frames);
    plab::save_dataset(ds, out);
    std::cout << "wrote " << ds.size() << " clips to " << out << "\n";
}

void cmd_pretrain(const CliOptions& opt) {
    const plab::Config cfg = load_config(opt);
    const plab::SyntheticActivityDataset ds = plab::load_dataset(cfg.get_string("dataset.dir"));
    const plab::EncoderConfig enc = encoder_config_from(cfg);

    plab::PretrainHyper hyper;
    hyper.lr = cfg.get_double("pretrain.lr", 0.01);
    hyper.epochs = static_cast<int>(cfg.get_int("pretrain.epochs", 10));
    hyper.batch = static_cast<int>(cfg.get_int("pretrain.batch", 8));
    hyper.seed =
        opt.has_seed ? opt.seed : static_cast<std::uint64_t>(cfg.get_int("pretrain.seed", 0));

    const plab::PretrainResult result = plab::pretrain(ds, enc, hyper);
    const std::string weights_out = cfg.get_string("weights_out", "weights.oslw");
    plab::save_weights(result.weights, enc, weights_out);

    const std::string loss_csv = cfg.get_string("pretrain.loss_csv", weights_out + ".loss.csv");
    std::ofstream loss(loss_csv, std::ios::binary);
    if (!loss) throw plab::FormatError("cannot write " + loss_csv);
    loss << "epoch,loss\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
        loss << e << ',' << plab::detail::fmt_double(result.epoch_loss[e]) << "\n";

    std::cout << "wrote " << weights_out << " (final epoch loss "
              << plab::detail::fmt_double(result.epoch_loss.back()) << ")\n";
    if (cfg.get_bool("pretrain.report_accuracy", false)) {
        std::cout << "training accuracy: " << plab::dataset_accuracy(ds, enc, result.weights)
                  << "\n";
    }
}

void cmd_demo(const CliOptions& opt) {
    const plab::Config cfg = load_config(opt);
    const plab::TaskSpec task = plab::task_from_config(cfg);
    const plab::ArmConfig arm = plab::arm_from_config(cfg);
    plab::SceneStyle style = plab::style_from_config(cfg);
    if (!style.zone) style.zone = task.target;
    plab::SimParams params;
    const std::uint64_t seed =
        opt.has_seed ? opt.seed : static_cast<std::uint64_t>(cfg.get_int("demo.seed", 0));

    const plab::ControlSequence controls = plab::scripted_demo(task, arm, params, seed);
    const plab::Trajectory traj = plab::rollout(task, controls, arm, params);
    const auto frames = static_cast<std::size_t>(cfg.get_int("demo.frames", 16));
    const plab::VideoClip clip = plab::render_trajectory(traj, arm, style, frames);

    const std::string out = cfg.get_string("demo.out", "demo_clip");
    plab::save_clip(clip, out);
    if (cfg.has("demo.controls_out")) {
        plab::Config ctrl;
        plab::controls_to_config(controls, ctrl);
        ctrl.save(cfg.get_string("demo.controls_out"));
    }
    std::cout << "demo completion: "
              << plab::task_completion(task, traj, arm, params) << ", clip in " << out << "\n";
}

void cmd_learn(const CliOptions& opt) {
    plab::Config cfg = load_config(opt);
    if (opt.has_seed) cfg.set_int("seeds", static_cast<long long>(opt.seed));
    const plab::ExperimentConfig ec = plab::experiment_from_config(cfg);
    const plab::ExperimentRecord record = plab::run_experiment(ec);
    for (const plab::CellRecord& cell : record.cells) {
        double mean = 0.0;
        for (const plab::SeedOutcome& s : cell.seeds) mean += s.final_completion;
        mean /= static_cast<double>(cell.seeds.size());
        std::cout << plab::to_string(cell.task) << "/" << plab::to_string(cell.setup)
                  << " mean completion over " << cell.seeds.size() << " seeds: " << mean << "\n";
    }
    std::cout << "results in " << ec.out_dir << " (" << record.wall_seconds << " s)\n";
}

void cmd_correlate(const CliOptions& opt) {
    const plab::Config cfg = load_config(opt);
    const std::string traces = cfg.get_string("correlate.traces");
    const std::vector<plab::TraceRow> rows = plab::load_trace_dir(traces);
    if (rows.empty()) throw plab::ConfigError("no trace_*.csv rows found in " + traces);
    const auto table = plab::correlate_table(rows);
    const std::string out =
        cfg.get_string("correlate.out", (fs::path(traces) / "correlation_table.csv").string());
    plab::save_correlation_table(table, out);
    for (const auto& cell : table) {
        std::cout << cell.task << "/" << cell.setup << "/" << cell.encoder << ": ";
        if (cell.n_runs == 0)
            std::cout << "undefined\n";
        else
            std::cout << plab::format_mean_std(cell.mean_r, cell.std_r) << " (n=" << cell.n_runs
                      << ")\n";
    }
    std::cout << "table in " << out << "\n";
}

void cmd_profile(const CliOptions& opt) {
    plab::Config cfg = load_config(opt);
    const plab::VideoClip demo = plab::load_clip(cfg.get_string("profile.demo"));
    const plab::VideoClip trial = plab::load_clip(cfg.get_string("profile.trial"));
    plab::ExperimentConfig ec = plab::experiment_from_config(cfg);
    ec.style.height = demo.height();
    ec.style.width = demo.width();
    ec.enc_cfg.input_h = demo.height();
    ec.enc_cfg.input_w = demo.width();
    const plab::ClipEncoder encoder = plab::make_experiment_encoder(ec);

    const auto window = static_cast<std::size_t>(cfg.get_int("profile.window", 16));
    const auto stride = static_cast<std::size_t>(cfg.get_int("profile.stride", 1));
    const std::vector<double> profile = plab::reward_profile(demo, trial, encoder, window, stride);

    const std::string out = cfg.get_string("profile.out", "reward_profile.csv");
    std::ofstream csv(out, std::ios::binary);
    if (!csv) throw plab::FormatError("cannot write " + out);
    csv << "window_start,reward\n";
    for (std::size_t i = 0; i < profile.size(); ++i)
        csv << i * stride << ',' << plab::detail::fmt_double(profile[i]) << "\n";
    if (cfg.get_bool("emit_plots", false))
        plab::svg_line_plot({{"reward", profile}}, "reward profile", out + ".svg");
    std::cout << profile.size() << " windows written to " << out << "\n";
}

void cmd_replay(const CliOptions& opt) {
    const plab::Config cfg = load_config(opt);
    const plab::ControlSequence controls =
        plab::controls_from_config(plab::Config::load(cfg.get_string("replay.controls")));
    const plab::TaskSpec task = plab::task_from_config(cfg);
    const plab::ArmConfig arm = plab::arm_from_config(cfg);
    plab::SceneStyle style = plab::style_from_config(cfg);
    if (!style.zone) style.zone = task.target;
    plab::SimParams params;

    const plab::Trajectory traj = plab::rollout(task, controls, arm, params);
    const auto frames = static_cast<std::size_t>(cfg.get_int("replay.frames", 16));
    const plab::VideoClip clip = plab::render_trajectory(traj, arm, style, frames);
    const std::string out = cfg.get_string("replay.out", "replay_clip");
    plab::save_clip(clip, out);
    if (cfg.has("replay.trajectory_csv")) {
        std::ofstream csv(cfg.get_string("replay.trajectory_csv"), std::ios::binary);
        csv << plab::trajectory_to_csv(traj);
    }
    std::cout << "replay completion: " << plab::task_completion(task, traj, arm, params)
              << ", clip in " << out << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"percept-lab: one-shot observation learning laboratory"};
    app.require_subcommand(1);

    CliOptions opt;
    struct Sub {
        CLI::App* app;
        void (*run)(const CliOptions&);
    };
    std::vector<Sub> subs;
    auto add = [&](const char* name, const char* desc, void (*run)(const CliOptions&)) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", opt.config_path, "configuration file (key = value lines)");
        sub->add_option("--seed", opt.seed, "seed override")->each([&](const std::string&) {
            opt.has_seed = true;
        });
        subs.push_back({sub, run});
    };

    add("dataset", "render a labelled synthetic activity dataset", cmd_dataset);
    add("pretrain", "train the activity classifier on a dataset", cmd_pretrain);
    add("demo", "script an expert demonstration and render its clip", cmd_demo);
    add("learn", "run the experiment matrix (learning from one demo)", cmd_learn);
    add("correlate", "build the reward/completion correlation table", cmd_correlate);
    add("profile", "sliding-window reward profile between two clips", cmd_profile);
    add("replay", "render a saved control sequence", cmd_replay);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 1;
    }

    try {
        for (const Sub& sub : subs) {
            if (sub.app->parsed()) {
                sub.run(opt);
                return 0;
            }
        }
        std::cerr << "no subcommand given\n" << app.help() << "\n";
        return 1;
    } catch (const plab::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const plab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
