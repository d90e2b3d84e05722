#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "plab/encoder.hpp"
#include "plab/error.hpp"
#include "plab/parallel.hpp"
#include "plab/render.hpp"
#include "plab/reward.hpp"
#include "plab/rng.hpp"
#include "plab/sim.hpp"

namespace plab {

// Control-sequence learners driven purely by the perceptual reward. The
// learners see only feature-space costs; task completion is never consulted
// during optimization (the harness scores candidates afterwards).

// Maps a simulated rollout to a point in activity space. The production
// wiring renders a 16-frame clip and encodes it; tests may substitute
// analytic surrogates (e.g. the final end-effector position).
using TrajectoryFeatureFn = std::function<ActivityFeature(const Trajectory&)>;

inline TrajectoryFeatureFn make_clip_feature_fn(const ArmConfig& arm, const SceneStyle& style,
                                                ClipEncoder encoder, std::size_t n_frames = 16) {
    return [arm, style, encoder = std::move(encoder), n_frames](const Trajectory& traj) {
        return encoder(render_trajectory(traj, arm, style, n_frames));
    };
}

struct StoConfig {
    int num_samples = 8;
    int iterations = 10;
    double noise_sigma = 0.1; // radians, element-wise i.i.d.
    std::uint64_t seed = 0;
    bool elitist = true;
};

struct EpisodicConfig {
    int runs = 10;
    int episodes_per_run = 20;
    int steps_per_episode = 60;
    int batch = 10;           // episodes per distribution update
    double elite_frac = 0.25; // best quartile drives the update
    double init_sigma = 0.3;  // radians
    double sigma_floor = 0.02;
    std::uint64_t seed = 0;
};

struct ScoredPolicy {
    ControlSequence controls;
    double reward = 0.0;
};

struct LearnResult {
    ControlSequence best;
    std::vector<double> cost_trace;               // per iteration (incumbent cost)
    std::vector<double> reward_trace;             // per iteration / per episode
    std::vector<ControlSequence> trace_controls;  // candidate behind each trace entry
    std::vector<ScoredPolicy> top;                // best policies, reward-descending
};

namespace detail {

inline double candidate_cost(const TaskSpec& task, const ArmConfig& arm, const SimParams& params,
                             const ActivityFeature& demo_feature,
                             const TrajectoryFeatureFn& feature_fn,
                             const ControlSequence& controls) {
    return cost(demo_feature, feature_fn(rollout(task, controls, arm, params)));
}

} // namespace detail

// Stochastic trajectory optimization: at each iteration, num_samples
// perturbations of the incumbent (element-wise Gaussian noise, one RNG
// stream per (seed, iteration, sample)) are rolled out and scored by
// feature-space cost against the demonstration; the minimum-cost sequence
// becomes the next incumbent. With the elitist flag the incumbent competes
// too, which makes the cost trace monotone non-increasing.
inline LearnResult sto_optimize(const TaskSpec& task, const ArmConfig& arm, const SimParams& params,
                                const ActivityFeature& demo_feature,
                                const TrajectoryFeatureFn& feature_fn, const StoConfig& cfg,
                                const ControlSequence& init) {
    if (cfg.num_samples < 1 || cfg.iterations < 1)
        throw UsageError("sto_optimize: num_samples and iterations must be >= 1");
    if (cfg.noise_sigma < 0.0) throw UsageError("sto_optimize: noise_sigma must be >= 0");
    if (init.dof != arm.dof()) throw UsageError("sto_optimize: init control dof mismatch");

    LearnResult result;
    ControlSequence incumbent = init;
    double incumbent_cost =
        detail::candidate_cost(task, arm, params, demo_feature, feature_fn, incumbent);
    result.cost_trace.push_back(incumbent_cost);
    result.reward_trace.push_back(-std::sqrt(incumbent_cost));
    result.trace_controls.push_back(incumbent);

    std::vector<ControlSequence> samples(cfg.num_samples);
    std::vector<double> sample_cost(cfg.num_samples);
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        parallel_for(static_cast<std::size_t>(cfg.num_samples), [&](std::size_t s) {
            Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(iter),
                             static_cast<std::uint64_t>(s)));
            ControlSequence cand = incumbent;
            for (auto& v : cand.values) v += rng.normal(0.0, cfg.noise_sigma);
            sample_cost[s] =
                detail::candidate_cost(task, arm, params, demo_feature, feature_fn, cand);
            samples[s] = std::move(cand);
        });
        int best = 0;
        for (int s = 1; s < cfg.num_samples; ++s)
            if (sample_cost[s] < sample_cost[best]) best = s;
        if (!cfg.elitist || sample_cost[best] <= incumbent_cost) {
            incumbent = samples[best];
            incumbent_cost = sample_cost[best];
        }
        result.cost_trace.push_back(incumbent_cost);
        result.reward_trace.push_back(-std::sqrt(incumbent_cost));
        result.trace_controls.push_back(incumbent);
    }
    result.best = incumbent;
    result.top.push_back({incumbent, -std::sqrt(incumbent_cost)});
    return result;
}

// Derivative-free episodic policy search: each run samples whole control
// sequences from a Gaussian over control space, scores each episode by the
// clip-level reward, and moves the distribution toward the best quartile of
// every completed batch (cross-entropy update). Returns the top-2 policies
// across all runs.
inline LearnResult episodic_search(const TaskSpec& task, const ArmConfig& arm,
                                   const SimParams& params, const ActivityFeature& demo_feature,
                                   const TrajectoryFeatureFn& feature_fn,
                                   const EpisodicConfig& cfg) {
    if (cfg.runs < 1 || cfg.episodes_per_run < 1 || cfg.steps_per_episode < 1 || cfg.batch < 1)
        throw UsageError("episodic_search: counts must be >= 1");
    if (cfg.steps_per_episode > task.max_steps)
        throw UsageError("episodic_search: steps_per_episode exceeds task horizon");

    const std::size_t dim = static_cast<std::size_t>(cfg.steps_per_episode) * arm.dof();
    const std::vector<double> init_joints = clamp_to_limits(arm, task.initial.joint_angles);

    LearnResult result;
    for (int run = 0; run < cfg.runs; ++run) {
        // Hold-at-initial-pose mean, isotropic initial spread.
        std::vector<double> mu(dim);
        for (std::size_t i = 0; i < dim; ++i) mu[i] = init_joints[i % arm.dof()];
        std::vector<double> sigma(dim, cfg.init_sigma);

        int done = 0;
        while (done < cfg.episodes_per_run) {
            const int batch = std::min(cfg.batch, cfg.episodes_per_run - done);
            std::vector<ControlSequence> episodes(batch);
            std::vector<double> rewards(batch);
            parallel_for(static_cast<std::size_t>(batch), [&](std::size_t e) {
                Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(run),
                                 static_cast<std::uint64_t>(done + static_cast<int>(e))));
                ControlSequence seq(static_cast<std::size_t>(cfg.steps_per_episode), arm.dof());
                for (std::size_t i = 0; i < dim; ++i)
                    seq.values[i] = mu[i] + sigma[i] * rng.normal();
                const Trajectory traj = rollout(task, seq, arm, params);
                rewards[e] = reward(demo_feature, feature_fn(traj));
                episodes[e] = std::move(seq);
            });
            for (int e = 0; e < batch; ++e) {
                result.reward_trace.push_back(rewards[e]);
                result.trace_controls.push_back(episodes[e]);
            }
            // Cross-entropy update on the completed batch.
            if (batch >= 2) {
                std::vector<int> order(batch);
                for (int e = 0; e < batch; ++e) order[e] = e;
                std::sort(order.begin(), order.end(),
                          [&](int a, int b) { return rewards[a] > rewards[b]; });
                const int elite =
                    std::max(1, static_cast<int>(std::ceil(batch * cfg.elite_frac)));
                for (std::size_t i = 0; i < dim; ++i) {
                    double mean = 0.0;
                    for (int e = 0; e < elite; ++e) mean += episodes[order[e]].values[i];
                    mean /= elite;
                    double var = 0.0;
                    for (int e = 0; e < elite; ++e) {
                        const double d = episodes[order[e]].values[i] - mean;
                        var += d * d;
                    }
                    var /= elite;
                    mu[i] = mean;
                    sigma[i] = std::max(std::sqrt(var), cfg.sigma_floor);
                }
            }
            done += batch;
        }
    }

    // Top-2 policies across all runs, sorted by reward.
    std::vector<std::size_t> order(result.reward_trace.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (result.reward_trace[a] != result.reward_trace[b])
            return result.reward_trace[a] > result.reward_trace[b];
        return a < b;
    });
    const std::size_t k = std::min<std::size_t>(2, order.size());
    for (std::size_t i = 0; i < k; ++i)
        result.top.push_back({result.trace_controls[order[i]], result.reward_trace[order[i]]});
    result.best = result.top.front().controls;
    return result;
}

// Rollout followed by the task-completion measure. Evaluation only: the
// completion score is never fed back into a learner.
inline double evaluate_policy(const TaskSpec& task, const ArmConfig& arm, const SimParams& params,
                              const ControlSequence& controls) {
    return task_completion(task, rollout(task, controls, arm, params), arm, params);
}

// Hold-at-initial-pose control sequence; the neutral initial candidate.
inline ControlSequence hold_initial_controls(const TaskSpec& task, const ArmConfig& arm,
                                             std::size_t steps) {
    const std::vector<double> q = clamp_to_limits(arm, task.initial.joint_angles);
    ControlSequence seq(steps, arm.dof());
    for (std::size_t i = 0; i < steps; ++i) std::copy(q.begin(), q.end(), seq.step(i));
    return seq;
}

} // namespace plab
