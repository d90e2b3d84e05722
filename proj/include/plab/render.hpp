#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "plab/clip.hpp"
#include "plab/config.hpp"
#include "plab/error.hpp"
#include "plab/rng.hpp"
#include "plab/sim.hpp"

namespace plab {

// Flat-shaded software rasterizer. No anti-aliasing, fixed z-order
// (background, clutter, target zone, objects, particles, manipulator), so
// identical inputs rasterize to identical bytes on every platform.
// Viewpoint variation is an image-plane quarter-turn rotation plus zoom.

struct Rgb {
    float r = 0.0f, g = 0.0f, b = 0.0f;
    bool operator==(const Rgb&) const = default;
};

struct CameraStyle {
    int quarter_turns = 0;
    double zoom = 1.0;
    double pixels_per_meter = 46.0;
    Vec2 center{0.45, 0.25}; // world point at the image center
};

struct ClutterShape {
    ObjShape shape = ObjShape::Disc;
    Vec2 position;
    double size = 0.05;
    Rgb color;
};

enum class MorphSkin { Arm, Hand };

enum class SetupTag { V1, V2, Obj1, Obj2, BG, M };

inline const char* to_string(SetupTag t) {
    switch (t) {
        case SetupTag::V1: return "V1";
        case SetupTag::V2: return "V2";
        case SetupTag::Obj1: return "Obj1";
        case SetupTag::Obj2: return "Obj2";
        case SetupTag::BG: return "BG";
        case SetupTag::M: return "M";
    }
    return "?";
}

inline SetupTag parse_setup_tag(const std::string& s) {
    if (s == "V1") return SetupTag::V1;
    if (s == "V2") return SetupTag::V2;
    if (s == "Obj1") return SetupTag::Obj1;
    if (s == "Obj2") return SetupTag::Obj2;
    if (s == "BG") return SetupTag::BG;
    if (s == "M") return SetupTag::M;
    throw ConfigError("unknown setup tag: " + s);
}

constexpr int kNumSetupTags = 6;

struct SceneStyle {
    CameraStyle camera;
    int height = 56;
    int width = 56;

    Rgb background{0.13f, 0.13f, 0.15f};
    std::string background_tag = "plain";
    std::optional<Zone> zone;     // target zone drawn as static scenery
    Rgb zone_color{0.16f, 0.42f, 0.19f};
    Rgb arm_color{0.42f, 0.58f, 0.82f};
    Rgb ee_color{0.95f, 0.86f, 0.28f};
    Rgb particle_color{0.92f, 0.69f, 0.18f};
    Rgb skin_color{0.86f, 0.64f, 0.48f};
    std::vector<Rgb> object_colors{{0.85f, 0.2f, 0.18f},
                                   {0.62f, 0.27f, 0.72f},
                                   {0.2f, 0.62f, 0.72f}};

    std::vector<ClutterShape> clutter;
    bool shape_override = false;  // swap disc <-> box for task objects
    MorphSkin skin = MorphSkin::Arm;
    std::string arm_variant;      // consumed by the experiment harness (M)

    // Variation knobs used by apply_setup.
    int v2_quarter_turns = 1;
    double v2_zoom = 1.2;

    Rgb object_color(int tag) const {
        if (object_colors.empty()) return {0.8f, 0.8f, 0.8f};
        return object_colors[static_cast<std::size_t>(tag) % object_colors.size()];
    }
};

namespace detail {

struct Canvas {
    Frame frame;
    double ppm = 1.0;
    Vec2 center;
    int h = 0, w = 0;

    explicit Canvas(const SceneStyle& style)
        : frame(Frame::filled(style.height, style.width, style.background.r, style.background.g,
                              style.background.b)),
          ppm(style.camera.pixels_per_meter * style.camera.zoom),
          center(style.camera.center),
          h(style.height),
          w(style.width) {}

    // world -> pixel coordinates (row, col); world y points up
    Vec2 to_px(Vec2 p) const {
        return {0.5 * h - (p.y - center.y) * ppm, 0.5 * w + (p.x - center.x) * ppm};
    }

    void put(int row, int col, Rgb c) {
        if (row < 0 || row >= h || col < 0 || col >= w) return;
        frame.at(row, col, 0) = c.r;
        frame.at(row, col, 1) = c.g;
        frame.at(row, col, 2) = c.b;
    }

    void fill_disc(Vec2 world_center, double world_radius, Rgb c) {
        const Vec2 pc = to_px(world_center);
        const double pr = world_radius * ppm;
        for (int row = static_cast<int>(std::floor(pc.x - pr)) - 1;
             row <= static_cast<int>(std::ceil(pc.x + pr)) + 1; ++row) {
            for (int col = static_cast<int>(std::floor(pc.y - pr)) - 1;
                 col <= static_cast<int>(std::ceil(pc.y + pr)) + 1; ++col) {
                const double dr = row + 0.5 - pc.x;
                const double dc = col + 0.5 - pc.y;
                if (dr * dr + dc * dc <= pr * pr) put(row, col, c);
            }
        }
    }

    void fill_box(Vec2 world_center, Vec2 half_extents, Rgb c) {
        const Vec2 pc = to_px(world_center);
        const double hr = half_extents.y * ppm; // rows span world y
        const double hc = half_extents.x * ppm;
        for (int row = static_cast<int>(std::floor(pc.x - hr)) - 1;
             row <= static_cast<int>(std::ceil(pc.x + hr)) + 1; ++row) {
            for (int col = static_cast<int>(std::floor(pc.y - hc)) - 1;
                 col <= static_cast<int>(std::ceil(pc.y + hc)) + 1; ++col) {
                if (std::abs(row + 0.5 - pc.x) <= hr && std::abs(col + 0.5 - pc.y) <= hc)
                    put(row, col, c);
            }
        }
    }

    // Thick segment (capsule) between two world points.
    void fill_capsule(Vec2 a, Vec2 b, double world_width, Rgb c) {
        const Vec2 pa = to_px(a), pb = to_px(b);
        const double pr = 0.5 * world_width * ppm;
        const Vec2 ab{pb.x - pa.x, pb.y - pa.y};
        const double len2 = ab.x * ab.x + ab.y * ab.y;
        const int r0 = static_cast<int>(std::floor(std::min(pa.x, pb.x) - pr)) - 1;
        const int r1 = static_cast<int>(std::ceil(std::max(pa.x, pb.x) + pr)) + 1;
        const int c0 = static_cast<int>(std::floor(std::min(pa.y, pb.y) - pr)) - 1;
        const int c1 = static_cast<int>(std::ceil(std::max(pa.y, pb.y) + pr)) + 1;
        for (int row = r0; row <= r1; ++row) {
            for (int col = c0; col <= c1; ++col) {
                const Vec2 p{row + 0.5 - pa.x, col + 0.5 - pa.y};
                double t = len2 > 0.0 ? (p.x * ab.x + p.y * ab.y) / len2 : 0.0;
                t = std::clamp(t, 0.0, 1.0);
                const double dx = p.x - t * ab.x;
                const double dy = p.y - t * ab.y;
                if (dx * dx + dy * dy <= pr * pr) put(row, col, c);
            }
        }
    }
};

inline void draw_object(Canvas& canvas, const Object& o, const SceneStyle& style) {
    ObjShape shape = o.shape;
    if (style.shape_override) shape = shape == ObjShape::Disc ? ObjShape::Box : ObjShape::Disc;
    const Rgb color = style.object_color(o.color_tag);
    if (shape == ObjShape::Disc) {
        const double r = o.shape == ObjShape::Disc
                             ? o.radius
                             : std::max(o.half_extents.x, o.half_extents.y);
        canvas.fill_disc(o.position, r, color);
    } else {
        const Vec2 he = o.shape == ObjShape::Box ? o.half_extents : Vec2{o.radius, o.radius};
        canvas.fill_box(o.position, he, color);
    }
}

inline void draw_manipulator(Canvas& canvas, const WorldState& state, const ArmConfig& arm,
                             const SceneStyle& style) {
    if (state.joint_angles.size() != arm.dof()) return; // no manipulator in this world
    const std::vector<Vec2> pts = fk(arm, clamp_to_limits(arm, state.joint_angles));
    if (style.skin == MorphSkin::Arm) {
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            canvas.fill_capsule(pts[i], pts[i + 1], arm.link_widths[i], style.arm_color);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            canvas.fill_disc(pts[i], 0.55 * arm.link_widths[i], style.arm_color);
        canvas.fill_disc(pts.back(), 0.045, style.ee_color);
    } else {
        // Hand sprite: forearm along the last link, palm disc, two fingers
        // fanning past the end effector.
        const Vec2 wrist = pts[pts.size() - 2];
        const Vec2 ee = pts.back();
        const Vec2 dir = (ee - wrist).normalized();
        const Vec2 side{-dir.y, dir.x};
        canvas.fill_capsule(wrist, ee, 0.055, style.skin_color);
        canvas.fill_disc(ee, 0.05, style.skin_color);
        canvas.fill_capsule(ee + side * 0.02, ee + dir * 0.07 + side * 0.035, 0.022,
                            style.skin_color);
        canvas.fill_capsule(ee - side * 0.02, ee + dir * 0.07 - side * 0.035, 0.022,
                            style.skin_color);
    }
}

} // namespace detail

// Deterministic rasterization of one world state.
inline Frame render_state(const WorldState& state, const ArmConfig& arm, const SceneStyle& style) {
    if (style.height < 16 || style.width < 16)
        throw UsageError("render_state: resolution must be at least 16x16");
    detail::Canvas canvas(style);

    for (const ClutterShape& cs : style.clutter) {
        if (cs.shape == ObjShape::Disc)
            canvas.fill_disc(cs.position, cs.size, cs.color);
        else
            canvas.fill_box(cs.position, {cs.size, cs.size}, cs.color);
    }
    if (style.zone) canvas.fill_disc(style.zone->center, style.zone->radius, style.zone_color);
    for (const Object& o : state.objects) detail::draw_object(canvas, o, style);
    for (const Vec2& p : state.particles) canvas.fill_disc(p, 0.02, style.particle_color);
    detail::draw_manipulator(canvas, state, arm, style);

    return rotate_frame(canvas.frame, style.camera.quarter_turns);
}

// Renders n frames selected from the trajectory by the floor(i*T/n) rule.
inline VideoClip render_trajectory(const Trajectory& traj, const ArmConfig& arm,
                                   const SceneStyle& style, std::size_t n_frames = 16) {
    if (n_frames < 1) throw UsageError("render_trajectory: n_frames must be >= 1");
    if (traj.states.empty()) throw UsageError("render_trajectory: empty trajectory");
    VideoClip clip;
    clip.fps = 8.0;
    clip.frames.reserve(n_frames);
    const std::size_t t = traj.states.size();
    for (std::size_t i = 0; i < n_frames; ++i) {
        clip.frames.push_back(render_state(traj.states[i * t / n_frames], arm, style));
    }
    return clip;
}

namespace detail {

// Alternate palettes for the Obj1/Obj2/BG variations.
inline const std::vector<Rgb>& alt_object_palette() {
    static const std::vector<Rgb> palette = {
        {0.2f, 0.62f, 0.72f},  {0.9f, 0.55f, 0.1f},  {0.35f, 0.75f, 0.3f},
        {0.85f, 0.3f, 0.65f},  {0.55f, 0.55f, 0.9f}, {0.95f, 0.9f, 0.35f},
    };
    return palette;
}

inline const std::vector<Rgb>& clutter_palette() {
    static const std::vector<Rgb> palette = {
        {0.35f, 0.32f, 0.3f}, {0.5f, 0.44f, 0.38f}, {0.28f, 0.35f, 0.42f},
        {0.45f, 0.4f, 0.5f},  {0.3f, 0.42f, 0.35f},
    };
    return palette;
}

inline Rgb pick_color_different(Rng& rng, const std::vector<Rgb>& palette, Rgb avoid) {
    for (int attempt = 0; attempt < 16; ++attempt) {
        const Rgb c = palette[static_cast<std::size_t>(rng.uniform_int(
            0, static_cast<int>(palette.size()) - 1))];
        if (!(c == avoid)) return c;
    }
    return palette.front();
}

} // namespace detail

// Applies one Table-style experimental variation to a base style. V1 is the
// identity; V2 rotates/zooms the camera; Obj1 recolors task objects; Obj2
// recolors and swaps their shapes; BG adds clutter decoys; M flags the
// hand-sprite skin and an alternate manipulator for the harness to apply.
inline SceneStyle apply_setup(const SceneStyle& base, SetupTag setup, std::uint64_t seed) {
    SceneStyle out = base;
    Rng rng(mix_seed(seed, 0x53455455ull, static_cast<std::uint64_t>(setup)));
    switch (setup) {
        case SetupTag::V1:
            break;
        case SetupTag::V2:
            out.camera.quarter_turns = (base.camera.quarter_turns + base.v2_quarter_turns) % 4;
            out.camera.zoom = base.camera.zoom * base.v2_zoom;
            break;
        case SetupTag::Obj2:
            out.shape_override = !base.shape_override;
            [[fallthrough]];
        case SetupTag::Obj1:
            for (auto& c : out.object_colors)
                c = detail::pick_color_different(rng, detail::alt_object_palette(), c);
            break;
        case SetupTag::BG: {
            const int n = rng.uniform_int(4, 6);
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
                out.clutter.push_back(cs);
            }
            out.background_tag = "cluttered";
            break;
        }
        case SetupTag::M:
            out.skin = MorphSkin::Hand;
            out.arm_variant = rng.uniform01() < 0.5 ? "dof2" : "dof4";
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline void style_to_config(const SceneStyle& s, Config& cfg, const std::string& prefix = "style") {
    cfg.set_int(prefix + ".height", s.height);
    cfg.set_int(prefix + ".width", s.width);
    cfg.set_int(prefix + ".camera.quarter_turns", s.camera.quarter_turns);
    cfg.set_double(prefix + ".camera.zoom", s.camera.zoom);
    cfg.set_double(prefix + ".camera.pixels_per_meter", s.camera.pixels_per_meter);
    cfg.set_doubles(prefix + ".camera.center", {s.camera.center.x, s.camera.center.y});
    cfg.set_doubles(prefix + ".background", {s.background.r, s.background.g, s.background.b});
    cfg.set_int(prefix + ".v2.quarter_turns", s.v2_quarter_turns);
    cfg.set_double(prefix + ".v2.zoom", s.v2_zoom);
    cfg.set_string(prefix + ".skin", s.skin == MorphSkin::Arm ? "arm" : "hand");
    if (s.zone)
        cfg.set_doubles(prefix + ".zone", {s.zone->center.x, s.zone->center.y, s.zone->radius});
}

inline SceneStyle style_from_config(const Config& cfg, const std::string& prefix = "style") {
    SceneStyle s;
    s.height = static_cast<int>(cfg.get_int(prefix + ".height", s.height));
    s.width = static_cast<int>(cfg.get_int(prefix + ".width", s.width));
    s.camera.quarter_turns =
        static_cast<int>(cfg.get_int(prefix + ".camera.quarter_turns", s.camera.quarter_turns));
    s.camera.zoom = cfg.get_double(prefix + ".camera.zoom", s.camera.zoom);
    s.camera.pixels_per_meter =
        cfg.get_double(prefix + ".camera.pixels_per_meter", s.camera.pixels_per_meter);
    const auto center = cfg.get_doubles(prefix + ".camera.center",
                                        {s.camera.center.x, s.camera.center.y});
    s.camera.center = {center.at(0), center.at(1)};
    const auto bg = cfg.get_doubles(prefix + ".background",
                                    {s.background.r, s.background.g, s.background.b});
    s.background = {static_cast<float>(bg.at(0)), static_cast<float>(bg.at(1)),
                    static_cast<float>(bg.at(2))};
    s.v2_quarter_turns = static_cast<int>(cfg.get_int(prefix + ".v2.quarter_turns",
                                                      s.v2_quarter_turns));
    s.v2_zoom = cfg.get_double(prefix + ".v2.zoom", s.v2_zoom);
    const std::string skin = cfg.get_string(prefix + ".skin", "arm");
    if (skin == "arm") s.skin = MorphSkin::Arm;
    else if (skin == "hand") s.skin = MorphSkin::Hand;
    else throw ConfigError(prefix + ".skin: unknown skin " + skin);
    if (cfg.has(prefix + ".zone")) {
        const auto z = cfg.get_doubles(prefix + ".zone");
        if (z.size() != 3) throw ConfigError(prefix + ".zone: expected `cx cy radius`");
        s.zone = Zone{{z[0], z[1]}, z[2]};
    }
    return s;
}

} // namespace plab
