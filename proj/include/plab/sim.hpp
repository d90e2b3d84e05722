#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "plab/config.hpp"
#include "plab/error.hpp"
#include "plab/rng.hpp"

namespace plab {

// Deterministic planar-manipulator world: joint-position control with a
// per-step angular speed cap, quasi-static frictionless pushing, and the
// five benchmark tasks. All values are immutable snapshots; step/rollout
// are pure functions of their inputs.

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
    Vec2 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{1.0, 0.0};
    }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct ArmConfig {
    std::vector<double> link_lengths;                 // meters
    std::vector<std::array<double, 2>> joint_limits;  // radians, [lo, hi]
    Vec2 base{0.0, 0.0};
    std::vector<double> link_widths;                  // render hint

    std::size_t dof() const { return link_lengths.size(); }
    double reach() const {
        double s = 0.0;
        for (double l : link_lengths) s += l;
        return s;
    }

    void validate() const {
        if (link_lengths.empty()) throw ConfigError("arm: needs at least one link");
        for (double l : link_lengths)
            if (l <= 0.0) throw ConfigError("arm: link lengths must be positive");
        if (joint_limits.size() != link_lengths.size())
            throw ConfigError("arm: joint limit count must match link count");
        for (const auto& lim : joint_limits)
            if (lim[0] > lim[1]) throw ConfigError("arm: joint limits must be ordered");
        if (link_widths.size() != link_lengths.size())
            throw ConfigError("arm: link width count must match link count");
    }
};

enum class ObjShape { Disc, Box };

struct Object {
    ObjShape shape = ObjShape::Disc;
    Vec2 position;
    double radius = 0.05;            // disc radius
    Vec2 half_extents{0.05, 0.05};   // boxes
    int color_tag = 0;
    bool movable = true;

    // Contact treats boxes as their bounding circle.
    double collision_radius() const {
        return shape == ObjShape::Disc ? radius : std::max(half_extents.x, half_extents.y);
    }
};

struct WorldState {
    std::vector<double> joint_angles;
    std::vector<Object> objects;
    std::vector<Vec2> particles; // swept debris
    int time_index = 0;
};

// Joint-position control sequence, flat row-major (step-major) storage.
struct ControlSequence {
    std::size_t dof = 0;
    std::vector<double> values;

    ControlSequence() = default;
    ControlSequence(std::size_t steps, std::size_t dof_, double fill = 0.0)
        : dof(dof_), values(steps * dof_, fill) {}

    std::size_t steps() const { return dof == 0 ? 0 : values.size() / dof; }
    double* step(std::size_t i) { return values.data() + i * dof; }
    const double* step(std::size_t i) const { return values.data() + i * dof; }

    bool operator==(const ControlSequence&) const = default;
};

enum class TaskKind { Reach, Push, Hammer, Sweep, Strike };

inline const char* to_string(TaskKind k) {
    switch (k) {
        case TaskKind::Reach: return "reach";
        case TaskKind::Push: return "push";
        case TaskKind::Hammer: return "hammer";
        case TaskKind::Sweep: return "sweep";
        case TaskKind::Strike: return "strike";
    }
    return "?";
}

inline TaskKind parse_task_kind(const std::string& s) {
    if (s == "reach") return TaskKind::Reach;
    if (s == "push") return TaskKind::Push;
    if (s == "hammer") return TaskKind::Hammer;
    if (s == "sweep") return TaskKind::Sweep;
    if (s == "strike") return TaskKind::Strike;
    throw ConfigError("unknown task kind: " + s);
}

constexpr int kNumTaskKinds = 5;
inline TaskKind task_kind_from_index(int i) { return static_cast<TaskKind>(i); }

struct Zone {
    Vec2 center;
    double radius = 0.1;
};

struct TaskSpec {
    TaskKind kind = TaskKind::Reach;
    Zone target;
    WorldState initial;
    int max_steps = 40;
};

struct SimParams {
    double omega_max = 0.15;       // rad per control step
    double ee_radius = 0.05;
    int substeps = 4;
    double particle_radius = 0.02;
};

struct Trajectory {
    std::vector<WorldState> states;
    std::size_t size() const { return states.size(); }
};

// ---------------------------------------------------------------------------
// Kinematics

// Planar chain: cumulative angle sums, link segments concatenated from the
// base. Returns base + one point per link end; back() is the end-effector.
inline std::vector<Vec2> fk(const ArmConfig& arm, const std::vector<double>& joints) {
    if (joints.size() != arm.dof()) throw UsageError("fk: joint count mismatch");
    std::vector<Vec2> pts;
    pts.reserve(arm.dof() + 1);
    pts.push_back(arm.base);
    double angle = 0.0;
    for (std::size_t i = 0; i < arm.dof(); ++i) {
        angle += joints[i];
        pts.push_back(pts.back() + Vec2{std::cos(angle), std::sin(angle)} * arm.link_lengths[i]);
    }
    return pts;
}

inline Vec2 fk_end_effector(const ArmConfig& arm, const std::vector<double>& joints) {
    return fk(arm, joints).back();
}

inline std::vector<double> clamp_to_limits(const ArmConfig& arm, const std::vector<double>& u) {
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        out[i] = std::clamp(u[i], arm.joint_limits[i][0], arm.joint_limits[i][1]);
    return out;
}

// ---------------------------------------------------------------------------
// Dynamics

// Moves an overlapping disc to tangency along the center-to-center ray.
inline Vec2 resolve_push(Vec2 ee, double ee_radius, Vec2 obj, double obj_radius) {
    const double sum = ee_radius + obj_radius;
    const Vec2 delta = obj - ee;
    const double d = delta.norm();
    if (d >= sum) return obj;
    const Vec2 dir = d > 1e-12 ? delta * (1.0 / d) : Vec2{1.0, 0.0};
    return ee + dir * sum;
}

namespace detail {

inline bool ee_clear_of_immovables(const WorldState& s, Vec2 ee, double ee_radius) {
    for (const Object& o : s.objects) {
        if (o.movable) continue;
        if (distance(ee, o.position) < ee_radius + o.collision_radius() - 1e-9) return false;
    }
    return true;
}

} // namespace detail

// Testing seam: counts task_completion invocations so the reward-
// information firewall (learners never see completion scores) can be
// asserted. Has no effect on any computed value.
inline std::atomic<std::uint64_t>& task_completion_call_count() {
    static std::atomic<std::uint64_t> count{0};
    return count;
}

// One control step: joints move toward the (limit-clamped) target with the
// per-step speed cap, split into substeps. Immovable objects stop the
// end-effector sweep at contact; movable discs and particles translate to
// tangency along the center-to-center direction.
inline WorldState step(const WorldState& state, const std::vector<double>& u,
                       const ArmConfig& arm, const SimParams& params) {
    if (u.size() != arm.dof()) throw UsageError("step: control dimension mismatch");
    WorldState s = state;
    s.joint_angles = clamp_to_limits(arm, s.joint_angles);
    const std::vector<double> target = clamp_to_limits(arm, u);

    const int n_sub = std::max(1, params.substeps);
    const double cap = params.omega_max / n_sub;
    for (int sub = 0; sub < n_sub; ++sub) {
        std::vector<double> delta(arm.dof());
        bool moving = false;
        for (std::size_t j = 0; j < arm.dof(); ++j) {
            delta[j] = std::clamp(target[j] - s.joint_angles[j], -cap, cap);
            if (delta[j] != 0.0) moving = true;
        }
        if (!moving) break;

        // Largest fraction of this sub-motion that keeps the end effector
        // clear of immovable objects.
        auto at_alpha = [&](double a) {
            std::vector<double> q(arm.dof());
            for (std::size_t j = 0; j < arm.dof(); ++j) q[j] = s.joint_angles[j] + a * delta[j];
            return q;
        };
        double alpha = 1.0;
        if (!detail::ee_clear_of_immovables(s, fk_end_effector(arm, at_alpha(1.0)),
                                            params.ee_radius)) {
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (detail::ee_clear_of_immovables(s, fk_end_effector(arm, at_alpha(mid)),
                                                   params.ee_radius))
                    lo = mid;
                else
                    hi = mid;
            }
            alpha = lo;
        }
        s.joint_angles = at_alpha(alpha);

        const Vec2 ee = fk_end_effector(arm, s.joint_angles);
        for (Object& o : s.objects) {
            if (!o.movable) continue;
            o.position = resolve_push(ee, params.ee_radius, o.position, o.collision_radius());
        }
        for (Vec2& p : s.particles) {
            p = resolve_push(ee, params.ee_radius, p, params.particle_radius);
        }
    }
    s.time_index = state.time_index + 1;
    return s;
}

// Iterated step from the task's initial state; |trajectory| = |controls|+1.
inline Trajectory rollout(const TaskSpec& task, const ControlSequence& controls,
                          const ArmConfig& arm, const SimParams& params) {
    if (controls.steps() > static_cast<std::size_t>(task.max_steps))
        throw UsageError("rollout: control sequence longer than task horizon");
    if (controls.steps() > 0 && controls.dof != arm.dof())
        throw UsageError("rollout: control dof mismatch");
    Trajectory traj;
    traj.states.reserve(controls.steps() + 1);
    WorldState s = task.initial;
    s.joint_angles = clamp_to_limits(arm, s.joint_angles);
    traj.states.push_back(s);
    for (std::size_t i = 0; i < controls.steps(); ++i) {
        std::vector<double> u(controls.step(i), controls.step(i) + controls.dof);
        s = step(s, u, arm, params);
        traj.states.push_back(s);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Task completion (evaluation only; never visible to learners)

namespace detail {

inline double ratio_score(double d_final, double d_initial) {
    if (d_initial == 0.0) return d_final == 0.0 ? 1.0 : 0.0;
    return std::clamp(1.0 - d_final / d_initial, 0.0, 1.0);
}

inline int first_movable(const WorldState& s) {
    for (std::size_t i = 0; i < s.objects.size(); ++i)
        if (s.objects[i].movable) return static_cast<int>(i);
    return -1;
}

// Surface distance between the end-effector disc and an object.
inline double tool_object_distance(const ArmConfig& arm, const SimParams& params,
                                   const WorldState& s, std::size_t obj_index) {
    const Vec2 ee = fk_end_effector(arm, s.joint_angles);
    const Object& o = s.objects[obj_index];
    return std::max(0.0, distance(ee, o.position) - params.ee_radius - o.collision_radius());
}

} // namespace detail

struct CompletionDetail {
    double score = 0.0; // in [0,1], higher is better
    double raw = 0.0;   // final distance / min distance / in-bin fraction
};

inline CompletionDetail task_completion_detail(const TaskSpec& task, const Trajectory& traj,
                                               const ArmConfig& arm, const SimParams& params) {
    if (traj.states.empty()) throw UsageError("task_completion: empty trajectory");
    const WorldState& first = traj.states.front();
    const WorldState& last = traj.states.back();
    CompletionDetail out;
    switch (task.kind) {
        case TaskKind::Reach: {
            const double d_i = distance(fk_end_effector(arm, first.joint_angles), task.target.center);
            const double d_f = distance(fk_end_effector(arm, last.joint_angles), task.target.center);
            out.raw = d_f;
            out.score = detail::ratio_score(d_f, d_i);
            break;
        }
        case TaskKind::Push: {
            const int oi = detail::first_movable(first);
            if (oi < 0) throw ConfigError("push task: no movable object");
            const double d_i = distance(first.objects[oi].position, task.target.center);
            const double d_f = distance(last.objects[oi].position, task.target.center);
            out.raw = d_f;
            out.score = detail::ratio_score(d_f, d_i);
            break;
        }
        case TaskKind::Sweep: {
            if (first.particles.empty()) throw ConfigError("sweep task: no particles");
            std::size_t inside = 0;
            for (const Vec2& p : last.particles)
                if (distance(p, task.target.center) <= task.target.radius) ++inside;
            out.raw = static_cast<double>(inside) / static_cast<double>(last.particles.size());
            out.score = out.raw;
            break;
        }
        case TaskKind::Hammer:
        case TaskKind::Strike: {
            if (first.objects.empty())
                throw ConfigError(std::string(to_string(task.kind)) + " task: no target object");
            // Minimum tool-to-target surface distance over the trajectory,
            // over all task objects, normalized against its initial value so
            // higher is better.
            double d0 = 1e300, dmin = 1e300;
            for (std::size_t oi = 0; oi < first.objects.size(); ++oi) {
                d0 = std::min(d0, detail::tool_object_distance(arm, params, first, oi));
            }
            for (const WorldState& s : traj.states) {
                for (std::size_t oi = 0; oi < s.objects.size(); ++oi) {
                    dmin = std::min(dmin, detail::tool_object_distance(arm, params, s, oi));
                }
            }
            out.raw = dmin;
            out.score = detail::ratio_score(dmin, d0);
            break;
        }
    }
    return out;
}

inline double task_completion(const TaskSpec& task, const Trajectory& traj, const ArmConfig& arm,
                              const SimParams& params) {
    task_completion_call_count().fetch_add(1, std::memory_order_relaxed);
    return task_completion_detail(task, traj, arm, params).score;
}

// ---------------------------------------------------------------------------
// Inverse kinematics and scripted expert demonstrations

// Damped-least-squares IK toward a 2D target; returns limit-clamped angles.
inline std::vector<double> solve_ik(const ArmConfig& arm, const std::vector<double>& start,
                                    Vec2 target, int iterations = 120, double damping = 0.05) {
    std::vector<double> q = clamp_to_limits(arm, start);
    const std::size_t n = arm.dof();
    for (int it = 0; it < iterations; ++it) {
        const std::vector<Vec2> pts = fk(arm, q);
        const Vec2 ee = pts.back();
        const Vec2 err = target - ee;
        if (err.norm() < 1e-10) break;
        // J columns: perp(ee - joint origin)
        std::vector<Vec2> cols(n);
        for (std::size_t j = 0; j < n; ++j) {
            const Vec2 r = ee - pts[j];
            cols[j] = Vec2{-r.y, r.x};
        }
        // dq = J^T (J J^T + damping^2 I)^{-1} err  with J J^T a 2x2 matrix
        double a = damping * damping, b = 0.0, c = 0.0, d = damping * damping;
        for (std::size_t j = 0; j < n; ++j) {
            a += cols[j].x * cols[j].x;
            b += cols[j].x * cols[j].y;
            c += cols[j].y * cols[j].x;
            d += cols[j].y * cols[j].y;
        }
        const double det = a * d - b * c;
        if (std::abs(det) < 1e-14) break;
        const Vec2 lam{(d * err.x - b * err.y) / det, (-c * err.x + a * err.y) / det};
        for (std::size_t j = 0; j < n; ++j) {
            q[j] += cols[j].x * lam.x + cols[j].y * lam.y;
        }
        q = clamp_to_limits(arm, q);
    }
    return q;
}

namespace detail {

inline void require_reachable(const ArmConfig& arm, Vec2 target, const char* what) {
    if (distance(target, arm.base) > 0.99 * arm.reach())
        throw ConfigError(std::string("scripted_demo: ") + what + " outside arm workspace");
}

// Appends IK-tracked waypoints: for each waypoint the joint target is held
// long enough for the speed-capped arm to arrive.
inline void append_waypoints(ControlSequence& seq, const ArmConfig& arm, const SimParams& params,
                             std::vector<double>& q, const std::vector<Vec2>& waypoints) {
    for (const Vec2& wp : waypoints) {
        const std::vector<double> q_next = solve_ik(arm, q, wp);
        double max_delta = 0.0;
        for (std::size_t j = 0; j < arm.dof(); ++j)
            max_delta = std::max(max_delta, std::abs(q_next[j] - q[j]));
        const int hold = std::max(1, static_cast<int>(std::ceil(max_delta / params.omega_max)));
        for (int i = 0; i < hold; ++i) {
            const std::size_t at = seq.values.size();
            seq.values.resize(at + arm.dof());
            std::copy(q_next.begin(), q_next.end(), seq.values.begin() + at);
        }
        q = q_next;
    }
}

inline std::vector<Vec2> line_points(Vec2 from, Vec2 to, double spacing) {
    std::vector<Vec2> pts;
    const double len = distance(from, to);
    const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    for (int i = 1; i <= n; ++i) pts.push_back(from + (to - from) * (static_cast<double>(i) / n));
    return pts;
}

} // namespace detail

// Inverse-kinematics waypoint plan for the task's own demonstration:
// reach drives the end effector straight to the zone center; push
// approaches behind the object and drives through it toward the zone;
// hammer/strike raise (or stage sideways) then descend onto the target;
// sweep wipes each particle toward the bin.
inline ControlSequence scripted_demo(const TaskSpec& task, const ArmConfig& arm,
                                     const SimParams& params, std::uint64_t seed = 0) {
    arm.validate();
    Rng rng(mix_seed(seed, 0x44454d4full));
    const WorldState& init = task.initial;
    std::vector<double> q = clamp_to_limits(arm, init.joint_angles);
    ControlSequence seq(0, arm.dof());
    const double spacing = 0.04 * rng.uniform(0.9, 1.1);

    switch (task.kind) {
        case TaskKind::Reach: {
            detail::require_reachable(arm, task.target.center, "target zone");
            const Vec2 ee0 = fk_end_effector(arm, q);
            detail::append_waypoints(seq, arm, params, q,
                                     detail::line_points(ee0, task.target.center, spacing));
            break;
        }
        case TaskKind::Push: {
            const int oi = detail::first_movable(init);
            if (oi < 0) throw ConfigError("push task: no movable object");
            const Object& obj = init.objects[oi];
            const Vec2 dir = (task.target.center - obj.position).normalized();
            const double clearance = obj.collision_radius() + params.ee_radius;
            const Vec2 behind = obj.position - dir * (clearance + 0.05);
            const Vec2 through = task.target.center - dir * (clearance - 0.005);
            detail::require_reachable(arm, behind, "push approach point");
            detail::require_reachable(arm, through, "push drive point");
            std::vector<Vec2> wps{behind};
            for (const Vec2& p : detail::line_points(behind, through, spacing)) wps.push_back(p);
            detail::append_waypoints(seq, arm, params, q, wps);
            break;
        }
        case TaskKind::Hammer: {
            if (init.objects.empty()) throw ConfigError("hammer task: no target object");
            const Object& obj = init.objects.front();
            const double raise = 0.22 * rng.uniform(0.9, 1.1);
            const Vec2 above = obj.position + Vec2{0.0, raise};
            detail::require_reachable(arm, above, "hammer raise point");
            detail::require_reachable(arm, obj.position, "hammer target");
            std::vector<Vec2> wps{above};
            for (const Vec2& p : detail::line_points(above, obj.position, spacing)) wps.push_back(p);
            detail::append_waypoints(seq, arm, params, q, wps);
            break;
        }
        case TaskKind::Sweep: {
            if (init.particles.empty()) throw ConfigError("sweep task: no particles");
            // Push each particle toward the bin, nearest to the bin first so
            // later wipes do not drag finished particles back out.
            std::vector<std::size_t> order(init.particles.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return distance(init.particles[a], task.target.center) <
                       distance(init.particles[b], task.target.center);
            });
            for (std::size_t idx : order) {
                const Vec2 p = init.particles[idx];
                const Vec2 dir = (task.target.center - p).normalized();
                const double clearance = params.particle_radius + params.ee_radius;
                const Vec2 behind = p - dir * (clearance + 0.04);
                const Vec2 through = task.target.center - dir * clearance * 0.5;
                detail::require_reachable(arm, behind, "sweep approach point");
                detail::require_reachable(arm, through, "sweep drive point");
                std::vector<Vec2> wps{behind};
                for (const Vec2& w : detail::line_points(behind, through, spacing)) wps.push_back(w);
                detail::append_waypoints(seq, arm, params, q, wps);
            }
            break;
        }
        case TaskKind::Strike: {
            if (init.objects.empty()) throw ConfigError("strike task: no blocks");
            Vec2 center{0.0, 0.0};
            for (const Object& o : init.objects) center = center + o.position;
            center = center * (1.0 / static_cast<double>(init.objects.size()));
            const Vec2 ee0 = fk_end_effector(arm, q);
            const double side = ee0.x >= center.x ? 1.0 : -1.0;
            const Vec2 staging = center + Vec2{side * 0.2, 0.04 * rng.uniform(0.8, 1.2)};
            const Vec2 through = center - Vec2{side * 0.12, 0.0};
            detail::require_reachable(arm, staging, "strike staging point");
            detail::require_reachable(arm, through, "strike drive point");
            std::vector<Vec2> wps{staging};
            for (const Vec2& p : detail::line_points(staging, through, spacing)) wps.push_back(p);
            detail::append_waypoints(seq, arm, params, q, wps);
            break;
        }
    }

    if (seq.steps() > static_cast<std::size_t>(task.max_steps)) {
        // Keep within the task horizon; drop uniformly from the middle.
        ControlSequence trimmed(static_cast<std::size_t>(task.max_steps), arm.dof());
        const std::size_t total = seq.steps();
        for (std::size_t i = 0; i < trimmed.steps(); ++i) {
            const std::size_t src = i * total / trimmed.steps();
            std::copy(seq.step(src), seq.step(src) + arm.dof(), trimmed.step(i));
        }
        return trimmed;
    }
    return seq;
}

// ---------------------------------------------------------------------------
// Default desk-scale instances

inline ArmConfig default_arm() {
    ArmConfig arm;
    arm.link_lengths = {0.3, 0.3, 0.3};
    arm.joint_limits = {{-2.6, 2.6}, {-2.6, 2.6}, {-2.6, 2.6}};
    arm.base = {0.0, 0.0};
    arm.link_widths = {0.05, 0.05, 0.05};
    return arm;
}

// Morphology variants for the M setup.
inline ArmConfig arm_variant(const std::string& name) {
    ArmConfig arm;
    if (name.empty() || name == "default" || name == "dof3") return default_arm();
    if (name == "dof2") {
        arm.link_lengths = {0.5, 0.4};
        arm.joint_limits = {{-2.6, 2.6}, {-2.6, 2.6}};
        arm.link_widths = {0.06, 0.05};
        return arm;
    }
    if (name == "dof4") {
        arm.link_lengths = {0.28, 0.25, 0.2, 0.17};
        arm.joint_limits = {{-2.6, 2.6}, {-2.6, 2.6}, {-2.6, 2.6}, {-2.6, 2.6}};
        arm.link_widths = {0.05, 0.045, 0.04, 0.035};
        return arm;
    }
    throw ConfigError("unknown arm variant: " + name);
}

// Canonical task instances used by the experiments; geometry sized so all
// entities stay inside the rendered viewport.
inline TaskSpec make_task(TaskKind kind) {
    TaskSpec task;
    task.kind = kind;
    task.initial.joint_angles = {-0.5, 0.4, 0.3};
    switch (kind) {
        case TaskKind::Reach:
            task.target = {{0.45, 0.5}, 0.1};
            task.max_steps = 40;
            break;
        case TaskKind::Push: {
            task.target = {{0.25, 0.5}, 0.11};
            task.max_steps = 70;
            Object obj;
            obj.shape = ObjShape::Disc;
            obj.position = {0.55, 0.12};
            obj.radius = 0.07;
            obj.color_tag = 0;
            obj.movable = true;
            task.initial.objects.push_back(obj);
            break;
        }
        case TaskKind::Hammer: {
            task.target = {{0.6, 0.1}, 0.08};
            task.max_steps = 60;
            Object obj;
            obj.shape = ObjShape::Disc;
            obj.position = {0.6, 0.1};
            obj.radius = 0.06;
            obj.color_tag = 1;
            obj.movable = false;
            task.initial.objects.push_back(obj);
            break;
        }
        case TaskKind::Sweep: {
            task.target = {{0.16, 0.48}, 0.14};
            task.max_steps = 160;
            task.initial.particles = {{0.5, 0.1}, {0.56, 0.14}, {0.5, 0.18}, {0.57, 0.22}};
            break;
        }
        case TaskKind::Strike: {
            task.target = {{0.55, 0.16}, 0.08};
            task.max_steps = 60;
            for (int i = 0; i < 3; ++i) {
                Object block;
                block.shape = ObjShape::Box;
                block.position = {0.55, 0.06 + 0.09 * i};
                block.half_extents = {0.045, 0.045};
                block.radius = 0.045;
                block.color_tag = 2;
                block.movable = true;
                task.initial.objects.push_back(block);
            }
            break;
        }
    }
    return task;
}

// ---------------------------------------------------------------------------
// Serialization

inline void arm_to_config(const ArmConfig& arm, Config& cfg, const std::string& prefix = "arm") {
    cfg.set_doubles(prefix + ".links", arm.link_lengths);
    cfg.set_doubles(prefix + ".widths", arm.link_widths);
    cfg.set_doubles(prefix + ".base", {arm.base.x, arm.base.y});
    std::vector<double> lims;
    for (const auto& l : arm.joint_limits) {
        lims.push_back(l[0]);
        lims.push_back(l[1]);
    }
    cfg.set_doubles(prefix + ".limits", lims);
}

inline ArmConfig arm_from_config(const Config& cfg, const std::string& prefix = "arm") {
    ArmConfig arm = default_arm();
    if (!cfg.has(prefix + ".links")) return arm;
    arm.link_lengths = cfg.get_doubles(prefix + ".links");
    const std::vector<double> base = cfg.get_doubles(prefix + ".base", {0.0, 0.0});
    arm.base = {base.at(0), base.at(1)};
    arm.link_widths = cfg.get_doubles(prefix + ".widths",
                                      std::vector<double>(arm.link_lengths.size(), 0.05));
    arm.joint_limits.clear();
    std::vector<double> default_lims;
    for (std::size_t i = 0; i < arm.link_lengths.size(); ++i) {
        default_lims.push_back(-2.6);
        default_lims.push_back(2.6);
    }
    const std::vector<double> lims = cfg.get_doubles(prefix + ".limits", default_lims);
    if (lims.size() != 2 * arm.link_lengths.size())
        throw ConfigError("arm limits: expected 2 values per joint");
    for (std::size_t i = 0; i < arm.link_lengths.size(); ++i)
        arm.joint_limits.push_back({lims[2 * i], lims[2 * i + 1]});
    arm.validate();
    return arm;
}

inline void task_to_config(const TaskSpec& task, Config& cfg, const std::string& prefix = "task") {
    cfg.set_string(prefix + ".kind", to_string(task.kind));
    cfg.set_doubles(prefix + ".zone", {task.target.center.x, task.target.center.y,
                                       task.target.radius});
    cfg.set_int(prefix + ".max_steps", task.max_steps);
    cfg.set_doubles(prefix + ".init_joints", task.initial.joint_angles);
    cfg.set_int(prefix + ".object_count", static_cast<long long>(task.initial.objects.size()));
    for (std::size_t i = 0; i < task.initial.objects.size(); ++i) {
        const Object& o = task.initial.objects[i];
        cfg.set_string(prefix + ".object_" + std::to_string(i) + ".shape",
                       o.shape == ObjShape::Disc ? "disc" : "box");
        cfg.set_doubles(prefix + ".object_" + std::to_string(i) + ".geom",
                        {o.position.x, o.position.y, o.radius, o.half_extents.x, o.half_extents.y});
        cfg.set_int(prefix + ".object_" + std::to_string(i) + ".color_tag", o.color_tag);
        cfg.set_bool(prefix + ".object_" + std::to_string(i) + ".movable", o.movable);
    }
    std::vector<double> parts;
    for (const Vec2& p : task.initial.particles) {
        parts.push_back(p.x);
        parts.push_back(p.y);
    }
    if (!parts.empty()) cfg.set_doubles(prefix + ".particles", parts);
}

inline TaskSpec task_from_config(const Config& cfg, const std::string& prefix = "task") {
    TaskSpec task = make_task(parse_task_kind(cfg.get_string(prefix + ".kind", "reach")));
    if (cfg.has(prefix + ".zone")) {
        const auto z = cfg.get_doubles(prefix + ".zone");
        if (z.size() != 3) throw ConfigError(prefix + ".zone: expected `cx cy radius`");
        task.target = {{z[0], z[1]}, z[2]};
    }
    task.max_steps = static_cast<int>(cfg.get_int(prefix + ".max_steps", task.max_steps));
    if (cfg.has(prefix + ".init_joints"))
        task.initial.joint_angles = cfg.get_doubles(prefix + ".init_joints");
    if (cfg.has(prefix + ".object_count")) {
        task.initial.objects.clear();
        const long long n = cfg.get_int(prefix + ".object_count");
        for (long long i = 0; i < n; ++i) {
            const std::string op = prefix + ".object_" + std::to_string(i);
            Object o;
            const std::string shape = cfg.get_string(op + ".shape", "disc");
            if (shape == "disc") o.shape = ObjShape::Disc;
            else if (shape == "box") o.shape = ObjShape::Box;
            else throw ConfigError(op + ".shape: unknown shape " + shape);
            const auto g = cfg.get_doubles(op + ".geom");
            if (g.size() != 5) throw ConfigError(op + ".geom: expected 5 values");
            o.position = {g[0], g[1]};
            o.radius = g[2];
            o.half_extents = {g[3], g[4]};
            o.color_tag = static_cast<int>(cfg.get_int(op + ".color_tag", 0));
            o.movable = cfg.get_bool(op + ".movable", true);
            task.initial.objects.push_back(o);
        }
    }
    if (cfg.has(prefix + ".particles")) {
        task.initial.particles.clear();
        const auto parts = cfg.get_doubles(prefix + ".particles");
        if (parts.size() % 2 != 0) throw ConfigError(prefix + ".particles: expected x y pairs");
        for (std::size_t i = 0; i < parts.size(); i += 2)
            task.initial.particles.push_back({parts[i], parts[i + 1]});
    }
    return task;
}

inline void controls_to_config(const ControlSequence& seq, Config& cfg) {
    cfg.set_int("controls.steps", static_cast<long long>(seq.steps()));
    cfg.set_int("controls.dof", static_cast<long long>(seq.dof));
    for (std::size_t i = 0; i < seq.steps(); ++i) {
        std::vector<double> row(seq.step(i), seq.step(i) + seq.dof);
        cfg.set_doubles("controls.step_" + std::to_string(i), row);
    }
}

inline ControlSequence controls_from_config(const Config& cfg) {
    const std::size_t steps = static_cast<std::size_t>(cfg.get_int("controls.steps"));
    const std::size_t dof = static_cast<std::size_t>(cfg.get_int("controls.dof"));
    ControlSequence seq(steps, dof);
    for (std::size_t i = 0; i < steps; ++i) {
        const auto row = cfg.get_doubles("controls.step_" + std::to_string(i));
        if (row.size() != dof) throw ConfigError("controls.step_" + std::to_string(i) +
                                                 ": expected " + std::to_string(dof) + " values");
        std::copy(row.begin(), row.end(), seq.step(i));
    }
    return seq;
}

// CSV export: step, joint angles, object positions, particle positions.
inline std::string trajectory_to_csv(const Trajectory& traj) {
    if (traj.states.empty()) throw UsageError("trajectory_to_csv: empty trajectory");
    std::ostringstream out;
    const WorldState& first = traj.states.front();
    out << "step";
    for (std::size_t j = 0; j < first.joint_angles.size(); ++j) out << ",joint_" << j;
    for (std::size_t i = 0; i < first.objects.size(); ++i)
        out << ",object_" << i << "_x,object_" << i << "_y";
    for (std::size_t i = 0; i < first.particles.size(); ++i)
        out << ",particle_" << i << "_x,particle_" << i << "_y";
    out << "\n";
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
        const WorldState& st = traj.states[s];
        out << s;
        for (double a : st.joint_angles) out << ',' << detail::fmt_double(a);
        for (const Object& o : st.objects)
            out << ',' << detail::fmt_double(o.position.x) << ','
                << detail::fmt_double(o.position.y);
        for (const Vec2& p : st.particles)
            out << ',' << detail::fmt_double(p.x) << ',' << detail::fmt_double(p.y);
        out << "\n";
    }
    return out.str();
}

} // namespace plab
