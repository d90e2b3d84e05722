#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "plab/baselines.hpp"
#include "plab/clip_io.hpp"
#include "plab/config.hpp"
#include "plab/encoder.hpp"
#include "plab/error.hpp"
#include "plab/learner.hpp"
#include "plab/render.hpp"
#include "plab/report.hpp"
#include "plab/reward.hpp"
#include "plab/rng.hpp"
#include "plab/sim.hpp"
#include "plab/weights_io.hpp"

namespace plab {

// Experiment orchestration: the setup-matrix runner, the reward/completion
// correlation table, and the synthetic pretraining corpus builder.

struct UndefinedCorrelationError : Error {
    using Error::Error;
};

// Sample Pearson correlation coefficient.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw UsageError("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw UsageError("pearson: need at least 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw UndefinedCorrelationError("pearson: constant input, correlation undefined");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Synthetic pretraining corpus

struct StyleRanges {
    double zoom_lo = 0.9, zoom_hi = 1.25;
    double geom_jitter = 0.07;   // object/zone position jitter (m)
    double joint_jitter = 0.25;  // initial pose jitter (rad)
    double clutter_prob = 0.5;
    double hand_prob = 0.2;
    double variant_prob = 0.3;   // alternate-morphology arm probability
};

namespace detail {

inline TaskSpec randomize_task(TaskKind kind, const StyleRanges& ranges, Rng& rng) {
    TaskSpec task = make_task(kind);
    const double j = ranges.geom_jitter;
    task.target.center.x += rng.uniform(-j, j);
    task.target.center.y += rng.uniform(-j, j);
    for (Object& o : task.initial.objects) {
        o.position.x += rng.uniform(-j, j);
        o.position.y += rng.uniform(-j, j);
    }
    for (Vec2& p : task.initial.particles) {
        p.x += rng.uniform(-j * 0.5, j * 0.5);
        p.y += rng.uniform(-j * 0.5, j * 0.5);
    }
    for (double& q : task.initial.joint_angles)
        q += rng.uniform(-ranges.joint_jitter, ranges.joint_jitter);
    return task;
}

inline SceneStyle randomize_style(const SceneStyle& base, const TaskSpec& task,
                                  const StyleRanges& ranges, Rng& rng) {
    SceneStyle style = base;
    style.zone = task.target;
    style.camera.quarter_turns = rng.uniform_int(0, 3);
    style.camera.zoom = rng.uniform(ranges.zoom_lo, ranges.zoom_hi);
    for (auto& c : style.object_colors)
        c = detail::pick_color_different(rng, detail::alt_object_palette(), Rgb{-1, -1, -1});
    if (rng.uniform01() < 0.3) style.shape_override = true;
    if (rng.uniform01() < ranges.clutter_prob) {
        const int n = rng.uniform_int(2, 5);
        const double half_w = 0.5 * base.width / base.camera.pixels_per_meter;
        const double half_h = 0.5 * base.height / base.camera.pixels_per_meter;
        for (int i = 0; i < n; ++i) {
            ClutterShape cs;
            cs.shape = rng.uniform01() < 0.5 ? ObjShape::Disc : ObjShape::Box;
            cs.position = {base.camera.center.x + rng.uniform(-half_w, half_w),
                           base.camera.center.y + rng.uniform(-half_h, half_h)};
            cs.size = rng.uniform(0.03, 0.08);
            cs.color = detail::clutter_palette()[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<int>(detail::clutter_palette().size()) - 1))];
            style.clutter.push_back(cs);
        }
    }
    if (rng.uniform01() < ranges.hand_prob) style.skin = MorphSkin::Hand;
    return style;
}

} // namespace detail

// Renders scripted demonstrations of each task class under randomized
// geometry and styles; class-balanced as requested. Clips come out at the
// given resolution with n_frames frames each, ready for pretraining.
inline SyntheticActivityDataset build_synthetic_dataset(
    const std::array<int, kNumTaskKinds>& per_class, const StyleRanges& ranges, std::uint64_t seed,
    int res_h = 56, int res_w = 56, int n_frames = 16) {
    for (int c : per_class)
        if (c < 1) throw UsageError("build_synthetic_dataset: counts must be >= 1");
    SimParams params;
    SceneStyle base;
    base.height = res_h;
    base.width = res_w;

    SyntheticActivityDataset ds;
    for (int k = 0; k < kNumTaskKinds; ++k) {
        const TaskKind kind = task_kind_from_index(k);
        for (int j = 0; j < per_class[static_cast<std::size_t>(k)]; ++j) {
            // A few attempts per sample: jittered geometry may land outside
            // the workspace, in which case the next substream is tried.
            for (int attempt = 0;; ++attempt) {
                Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k),
                                 static_cast<std::uint64_t>(j * 13 + attempt)));
                try {
                    const TaskSpec task = detail::randomize_task(kind, ranges, rng);
                    ArmConfig arm = default_arm();
                    if (rng.uniform01() < ranges.variant_prob)
                        arm = arm_variant(rng.uniform01() < 0.5 ? "dof2" : "dof4");
                    std::vector<double> init = task.initial.joint_angles;
                    init.resize(arm.dof(), 0.2);
                    TaskSpec fitted = task;
                    fitted.initial.joint_angles = init;
                    const ControlSequence demo = scripted_demo(fitted, arm, params, rng.next_u64());
                    const Trajectory traj = rollout(fitted, demo, arm, params);
                    const SceneStyle style = detail::randomize_style(base, fitted, ranges, rng);
                    ds.clips.push_back(render_trajectory(traj, arm, style,
                                                         static_cast<std::size_t>(n_frames)));
                    ds.labels.push_back(k);
                    break;
                } catch (const ConfigError&) {
                    if (attempt >= 8) throw;
                }
            }
        }
    }
    return ds;
}

inline void save_dataset(const SyntheticActivityDataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ofstream labels(fs::path(dir) / "labels.csv", std::ios::binary);
    if (!labels) throw FormatError("cannot write labels.csv in " + dir);
    labels << "clip,label,class\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "clip_%05zu", i);
        save_clip(ds.clips[i], (fs::path(dir) / name).string());
        labels << name << ',' << ds.labels[i] << ','
               << to_string(task_kind_from_index(ds.labels[i])) << "\n";
    }
}

inline SyntheticActivityDataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream labels(fs::path(dir) / "labels.csv");
    if (!labels) throw FormatError("missing labels.csv in " + dir);
    std::string line;
    if (!std::getline(labels, line)) throw FormatError("empty labels.csv in " + dir);
    SyntheticActivityDataset ds;
    while (std::getline(labels, line)) {
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() < 2) throw FormatError("malformed labels.csv row: " + line);
        ds.clips.push_back(load_clip((fs::path(dir) / f[0]).string()));
        try {
            ds.labels.push_back(std::stoi(f[1]));
        } catch (const std::exception&) {
            throw FormatError("malformed label in labels.csv: " + line);
        }
    }
    if (ds.size() == 0) throw FormatError("labels.csv lists no clips in " + dir);
    return ds;
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct ExperimentConfig {
    std::vector<TaskKind> tasks{TaskKind::Reach};
    std::vector<SetupTag> setups{SetupTag::V1};
    std::string encoder = "proposed";  // proposed | baseline1 | baseline2
    std::string learner = "sto";       // sto | episodic
    std::vector<std::uint64_t> seeds{1};

    std::string weights_path;          // proposed-encoder weights (OSLW)
    std::string out_dir = "results";
    bool emit_plots = false;

    EncoderConfig enc_cfg = EncoderConfig::desk();
    std::uint64_t baseline1_seed = 7;
    int clip_frames = 16;

    StoConfig sto;
    EpisodicConfig episodic;
    SimParams sim;
    ArmConfig arm = default_arm();
    SceneStyle style;
};

inline ExperimentConfig experiment_from_config(const Config& cfg) {
    ExperimentConfig ec;
    ec.tasks.clear();
    for (const auto& t : cfg.get_strings("tasks", {"reach"})) ec.tasks.push_back(parse_task_kind(t));
    ec.setups.clear();
    for (const auto& s : cfg.get_strings("setups", {"V1"})) ec.setups.push_back(parse_setup_tag(s));
    ec.encoder = cfg.get_string("encoder", "proposed");
    if (ec.encoder != "proposed" && ec.encoder != "baseline1" && ec.encoder != "baseline2")
        throw ConfigError("encoder: expected proposed|baseline1|baseline2, got " + ec.encoder);
    ec.learner = cfg.get_string("learner", "sto");
    if (ec.learner != "sto" && ec.learner != "episodic")
        throw ConfigError("learner: expected sto|episodic, got " + ec.learner);
    ec.seeds.clear();
    for (double s : cfg.get_doubles("seeds", {1.0}))
        ec.seeds.push_back(static_cast<std::uint64_t>(s));
    if (ec.seeds.empty()) throw ConfigError("seeds: need at least one seed");

    ec.weights_path = cfg.get_string("weights", "");
    ec.out_dir = cfg.get_string("out_dir", "results");
    ec.emit_plots = cfg.get_bool("emit_plots", false);

    const std::string enc_name = cfg.get_string("encoder.config", "desk");
    if (enc_name == "desk") ec.enc_cfg = EncoderConfig::desk();
    else if (enc_name == "c3d_full") ec.enc_cfg = EncoderConfig::c3d_full();
    else throw ConfigError("encoder.config: expected desk|c3d_full, got " + enc_name);
    ec.enc_cfg.num_classes = static_cast<int>(cfg.get_int("encoder.classes", kNumTaskKinds));
    ec.baseline1_seed = static_cast<std::uint64_t>(cfg.get_int("baseline1.seed", 7));
    ec.clip_frames = static_cast<int>(cfg.get_int("clip_frames", 16));

    ec.sto.num_samples = static_cast<int>(cfg.get_int("sto.num_samples", 8));
    ec.sto.iterations = static_cast<int>(cfg.get_int("sto.iterations", 10));
    ec.sto.noise_sigma = cfg.get_double("sto.sigma", 0.1);
    ec.sto.elitist = cfg.get_bool("sto.elitist", true);

    ec.episodic.runs = static_cast<int>(cfg.get_int("episodic.runs", 10));
    ec.episodic.episodes_per_run = static_cast<int>(cfg.get_int("episodic.episodes", 20));
    ec.episodic.steps_per_episode = static_cast<int>(cfg.get_int("episodic.steps", 60));
    ec.episodic.batch = static_cast<int>(cfg.get_int("episodic.batch", 10));
    ec.episodic.elite_frac = cfg.get_double("episodic.elite_frac", 0.25);
    ec.episodic.init_sigma = cfg.get_double("episodic.init_sigma", 0.3);
    ec.episodic.sigma_floor = cfg.get_double("episodic.sigma_floor", 0.02);

    ec.sim.omega_max = cfg.get_double("sim.omega_max", 0.15);
    ec.sim.ee_radius = cfg.get_double("sim.ee_radius", 0.05);
    ec.sim.substeps = static_cast<int>(cfg.get_int("sim.substeps", 4));
    ec.sim.particle_radius = cfg.get_double("sim.particle_radius", 0.02);

    ec.arm = arm_from_config(cfg);
    ec.style = style_from_config(cfg);
    ec.style.height = ec.enc_cfg.input_h;
    ec.style.width = ec.enc_cfg.input_w;
    return ec;
}

// ---------------------------------------------------------------------------
// Experiment runner

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::vector<TraceRow> trace;
    double final_reward = 0.0;
    double final_completion = 0.0;
    double wall_seconds = 0.0;
    ControlSequence best;
};

struct CellRecord {
    TaskKind task = TaskKind::Reach;
    SetupTag setup = SetupTag::V1;
    std::string encoder;
    std::string learner;
    std::vector<SeedOutcome> seeds;
};

struct ExperimentRecord {
    std::vector<CellRecord> cells;
    double wall_seconds = 0.0;
};

// Builds the clip encoder named by the experiment config: the proposed 3D
// encoder (weights loaded from disk), the frozen 2D conv stack (baseline-1)
// or frame-averaged HOG (baseline-2).
inline ClipEncoder make_experiment_encoder(const ExperimentConfig& ec) {
    if (ec.encoder == "proposed") {
        if (ec.weights_path.empty())
            throw ConfigError("proposed encoder requires `weights = <file>` in the config");
        auto weights = std::make_shared<WeightBundle>(load_weights(ec.enc_cfg, ec.weights_path));
        const EncoderConfig cfg = ec.enc_cfg;
        return [cfg, weights](const VideoClip& clip) { return encode(clip, cfg, *weights); };
    }
    if (ec.encoder == "baseline1") {
        auto b1 = std::make_shared<Baseline1>(ec.style.height, ec.style.width, ec.baseline1_seed);
        return [b1](const VideoClip& clip) { return baseline1_encode(clip, *b1); };
    }
    return [](const VideoClip& clip) { return baseline2_encode(clip); };
}

namespace detail {

// Morphology assignment for one cell. For M the demonstration is performed
// by a different morphology (hand sprite for reach/push, an alternate arm
// otherwise) while the robot trial keeps the default arm; all other setups
// vary the trial side only.
struct CellWiring {
    ArmConfig demo_arm;
    SceneStyle demo_style;
    ArmConfig trial_arm;
    SceneStyle trial_style;
};

inline CellWiring wire_cell(const ExperimentConfig& ec, const TaskSpec& task, SetupTag setup,
                            std::uint64_t seed) {
    CellWiring w;
    SceneStyle base = ec.style;
    base.zone = task.target;
    w.demo_arm = ec.arm;
    w.demo_style = base;
    w.trial_arm = ec.arm;
    w.trial_style = base;
    const SceneStyle varied = apply_setup(base, setup, seed);
    if (setup == SetupTag::M) {
        if (task.kind == TaskKind::Reach || task.kind == TaskKind::Push) {
            w.demo_style.skin = MorphSkin::Hand;
        } else {
            w.demo_arm = arm_variant(varied.arm_variant);
        }
    } else {
        w.trial_style = varied;
    }
    return w;
}

inline std::vector<double> fit_joints(const std::vector<double>& joints, const ArmConfig& arm) {
    std::vector<double> q = joints;
    q.resize(arm.dof(), 0.2);
    return clamp_to_limits(arm, q);
}

} // namespace detail

// Runs one (task, setup, learner, encoder) cell for one seed. The single
// demonstration is scripted deterministically (seed 0), so every learner
// seed sees the same demo; apply_setup derives the trial-side variation
// from the experiment seed.
inline SeedOutcome run_cell(const ExperimentConfig& ec, const ClipEncoder& encoder_fn,
                            TaskKind kind, SetupTag setup, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    TaskSpec task = make_task(kind);
    detail::CellWiring w = detail::wire_cell(ec, task, setup, seed);

    TaskSpec demo_task = task;
    demo_task.initial.joint_angles = detail::fit_joints(task.initial.joint_angles, w.demo_arm);
    const ControlSequence demo_controls = scripted_demo(demo_task, w.demo_arm, ec.sim, 0);
    const Trajectory demo_traj = rollout(demo_task, demo_controls, w.demo_arm, ec.sim);
    const VideoClip demo_clip = render_trajectory(demo_traj, w.demo_arm, w.demo_style,
                                                  static_cast<std::size_t>(ec.clip_frames));
    const ActivityFeature demo_feature = encoder_fn(demo_clip);

    TaskSpec trial_task = task;
    trial_task.initial.joint_angles = detail::fit_joints(task.initial.joint_angles, w.trial_arm);
    const TrajectoryFeatureFn feature_fn = make_clip_feature_fn(
        w.trial_arm, w.trial_style, encoder_fn, static_cast<std::size_t>(ec.clip_frames));

    LearnResult lr;
    if (ec.learner == "sto") {
        StoConfig sto = ec.sto;
        sto.seed = seed;
        const ControlSequence init = hold_initial_controls(
            trial_task, w.trial_arm, static_cast<std::size_t>(trial_task.max_steps));
        lr = sto_optimize(trial_task, w.trial_arm, ec.sim, demo_feature, feature_fn, sto, init);
    } else {
        EpisodicConfig ep = ec.episodic;
        ep.seed = seed;
        ep.steps_per_episode = std::min(ep.steps_per_episode, trial_task.max_steps);
        lr = episodic_search(trial_task, w.trial_arm, ec.sim, demo_feature, feature_fn, ep);
    }

    // Completion is scored only now, after learning has finished.
    SeedOutcome out;
    out.seed = seed;
    out.best = lr.best;
    for (std::size_t i = 0; i < lr.trace_controls.size(); ++i) {
        const Trajectory traj = rollout(trial_task, lr.trace_controls[i], w.trial_arm, ec.sim);
        const CompletionDetail cd = task_completion_detail(trial_task, traj, w.trial_arm, ec.sim);
        TraceRow row;
        row.task = to_string(kind);
        row.setup = to_string(setup);
        row.encoder = ec.encoder;
        row.learner = ec.learner;
        row.seed = seed;
        row.iteration = static_cast<long>(i);
        row.reward = lr.reward_trace[i];
        row.cost = ec.learner == "sto" ? lr.cost_trace[i]
                                       : lr.reward_trace[i] * lr.reward_trace[i];
        row.completion = cd.score;
        row.raw_metric = cd.raw;
        out.trace.push_back(row);
    }
    out.final_reward = out.trace.back().reward;
    out.final_completion = evaluate_policy(trial_task, w.trial_arm, ec.sim, lr.best);
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// Full matrix run: every (task, setup, seed) cell. Writes one trace file
// per cell plus a merged results.csv holding each cell's final row; all
// outputs are a pure function of the configuration.
inline ExperimentRecord run_experiment(const ExperimentConfig& ec) {
    namespace fs = std::filesystem;
    const auto t0 = std::chrono::steady_clock::now();
    const ClipEncoder encoder_fn = make_experiment_encoder(ec);
    fs::create_directories(ec.out_dir);

    ExperimentRecord record;
    std::ofstream results(fs::path(ec.out_dir) / "results.csv", std::ios::binary);
    if (!results) throw FormatError("cannot write results.csv in " + ec.out_dir);
    results << kResultsHeader << "\n";

    for (TaskKind kind : ec.tasks) {
        for (SetupTag setup : ec.setups) {
            CellRecord cell;
            cell.task = kind;
            cell.setup = setup;
            cell.encoder = ec.encoder;
            cell.learner = ec.learner;
            for (std::uint64_t seed : ec.seeds) {
                SeedOutcome outcome = run_cell(ec, encoder_fn, kind, setup, seed);

                std::ostringstream name;
                name << "trace_" << to_string(kind) << "_" << to_string(setup) << "_" << ec.encoder
                     << "_" << ec.learner << "_seed" << seed << ".csv";
                std::ofstream trace(fs::path(ec.out_dir) / name.str(), std::ios::binary);
                if (!trace) throw FormatError("cannot write trace file in " + ec.out_dir);
                trace << kTraceHeader << "\n";
                for (const TraceRow& row : outcome.trace)
                    trace << trace_row_to_csv(row, /*with_raw=*/true) << "\n";

                TraceRow final_row = outcome.trace.back();
                final_row.completion = outcome.final_completion;
                results << trace_row_to_csv(final_row, /*with_raw=*/false) << "\n";

                if (ec.emit_plots) {
                    std::vector<double> costs, completions;
                    for (const TraceRow& row : outcome.trace) {
                        costs.push_back(row.cost);
                        completions.push_back(row.completion);
                    }
                    std::ostringstream pname;
                    pname << "plot_" << to_string(kind) << "_" << to_string(setup) << "_seed" << seed
                          << ".svg";
                    svg_line_plot({{"cost", costs}, {"completion", completions}},
                                  name.str(), (fs::path(ec.out_dir) / pname.str()).string());
                }
                cell.seeds.push_back(std::move(outcome));
            }
            record.cells.push_back(std::move(cell));
        }
    }
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return record;
}

// ---------------------------------------------------------------------------
// Correlation table

struct CorrelationCell {
    std::string task;
    std::string setup;
    std::string encoder;
    double mean_r = 0.0;
    double std_r = 0.0;
    int n_runs = 0; // 0 marks an undefined cell
};

// Per run (seed), correlates the reward trace against the matching
// completion trace; reports mean +- sample standard deviation across runs.
// Runs with degenerate traces are dropped; a cell with no usable run is
// marked undefined (n_runs = 0, NaN statistics).
inline std::vector<CorrelationCell> correlate_table(const std::vector<TraceRow>& rows) {
    std::map<std::tuple<std::string, std::string, std::string>,
             std::map<std::uint64_t, std::vector<const TraceRow*>>>
        groups;
    for (const TraceRow& r : rows)
        groups[{r.task, r.setup, r.encoder}][r.seed].push_back(&r);

    std::vector<CorrelationCell> table;
    for (const auto& [key, by_seed] : groups) {
        CorrelationCell cell;
        cell.task = std::get<0>(key);
        cell.setup = std::get<1>(key);
        cell.encoder = std::get<2>(key);
        std::vector<double> rs;
        for (const auto& [seed, trace] : by_seed) {
            if (trace.size() < 2) continue;
            std::vector<double> rewards, completions;
            for (const TraceRow* row : trace) {
                rewards.push_back(row->reward);
                completions.push_back(row->completion);
            }
            try {
                rs.push_back(pearson(rewards, completions));
            } catch (const UndefinedCorrelationError&) {
                // degenerate run; skipped
            }
        }
        cell.n_runs = static_cast<int>(rs.size());
        if (rs.empty()) {
            cell.mean_r = std::nan("");
            cell.std_r = std::nan("");
        } else {
            double mean = 0.0;
            for (double r : rs) mean += r;
            mean /= static_cast<double>(rs.size());
            double var = 0.0;
            for (double r : rs) var += (r - mean) * (r - mean);
            cell.mean_r = mean;
            cell.std_r = rs.size() > 1 ? std::sqrt(var / (static_cast<double>(rs.size()) - 1.0))
                                       : 0.0;
        }
        table.push_back(cell);
    }
    return table;
}

inline void save_correlation_table(const std::vector<CorrelationCell>& table,
                                   const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write correlation table: " + path);
    out << "task,setup,encoder,mean_r,std_r,n_runs\n";
    for (const CorrelationCell& c : table) {
        out << c.task << ',' << c.setup << ',' << c.encoder << ',';
        if (c.n_runs == 0)
            out << "nan,nan,0\n";
        else
            out << detail::fmt_double(c.mean_r) << ',' << detail::fmt_double(c.std_r) << ','
                << c.n_runs << "\n";
    }
}

// Table-style "mean +- std" cell text.
inline std::string format_mean_std(double mean, double stddev) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f +- %.4f", mean, stddev);
    return buf;
}

} // namespace plab
