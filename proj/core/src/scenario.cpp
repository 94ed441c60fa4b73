#include "guider/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "guider/io/pgm_io.hpp"
#include "guider/occupancy_grid.hpp"
#include "guider/replay.hpp"
#include "guider/rng.hpp"

namespace guider::scenario {

namespace {

using replay::ManipPhase;
using replay::NavPhase;
using replay::OdoSample;
using replay::SessionLog;

// ---------------------------------------------------------------------------
// Navigation-side builders

constexpr int kGridSide = 120;       // 6 m x 6 m at 0.05 m
constexpr double kGridOrigin = -3.0;
constexpr double kClusterHalf = 0.15; // occupied blocks of 0.3 m x 0.3 m

void add_cluster(OccupancyGrid& grid, double cx, double cy, double half = kClusterHalf) {
    const int x0 = grid.cell_x_of(cx - half);
    const int x1 = grid.cell_x_of(cx + half);
    const int y0 = grid.cell_y_of(cy - half);
    const int y1 = grid.cell_y_of(cy + half);
    for (int y = std::max(0, y0); y <= std::min(grid.height - 1, y1); ++y)
        for (int x = std::max(0, x0); x <= std::min(grid.width - 1, x1); ++x)
            grid.at(x, y) = CellState::Occupied;
}

struct BaseLeg {
    double x = 0.0;
    double y = 0.0;
    double dwell = 0.0; // seconds of standstill after arrival
};

/// Scripted omnidirectional drive: cruise toward each waypoint with a linear
/// slowdown inside 0.5 m, then dwell. 10 Hz samples, seeded jitter.
std::vector<OdoSample> base_trajectory(double x0, double y0, const std::vector<BaseLeg>& legs,
                                       double cruise, Rng& rng, double noise_sigma,
                                       double* end_t) {
    constexpr double kDt = 0.1;
    constexpr double kSlowRadius = 0.5;
    constexpr double kMinSpeed = 0.08;

    std::vector<OdoSample> samples;
    double x = x0, y = y0, t = 0.0;
    auto emit = [&](double vx, double vy) {
        OdoSample s;
        s.t = t;
        s.frame = "map";
        s.x = x + rng.normal(0.0, noise_sigma);
        s.y = y + rng.normal(0.0, noise_sigma);
        s.vx = vx;
        s.vy = vy;
        samples.push_back(s);
        t += kDt;
    };

    for (const auto& leg : legs) {
        while (true) {
            const double dx = leg.x - x;
            const double dy = leg.y - y;
            const double dist = std::hypot(dx, dy);
            if (dist < 1e-3) break;
            double speed = cruise * std::min(1.0, dist / kSlowRadius);
            speed = std::max(speed, kMinSpeed);
            const double ux = dx / dist;
            const double uy = dy / dist;
            emit(speed * ux, speed * uy);
            const double step = std::min(speed * kDt, dist);
            x += ux * step;
            y += uy * step;
        }
        const int dwell_samples = static_cast<int>(std::lround(leg.dwell / kDt));
        for (int i = 0; i < dwell_samples; ++i) emit(0.0, 0.0);
    }
    emit(0.0, 0.0);
    *end_t = samples.back().t;
    return samples;
}

std::vector<std::pair<double, double>> region_square(double cx, double cy, double half) {
    return {{cx - half, cy - half}, {cx + half, cy - half},
            {cx + half, cy + half}, {cx - half, cy + half}};
}

// ---------------------------------------------------------------------------
// Manipulation-side builders (camera frame; wrist camera looks straight down
// at the bench, so the camera z axis is the workspace vertical)

struct SceneObject {
    Eigen::Vector3d pos{0, 0, 1.0}; // camera frame, z = depth, meters
    double half_u_m = 0.025;        // half extent along u (disk radius when round)
    double half_v_m = 0.025;
    bool round = true;
    double saliency_amp = 1.0;      // blob amplitude before the global stretch
    double confidence = 0.9;
};

constexpr double kBackdropZ = 1.4; // bench surface depth, meters

geom::CameraIntrinsics scene_intrinsics() {
    geom::CameraIntrinsics intr;
    intr.fx = intr.fy = 600.0;
    intr.cx = 320.0;
    intr.cy = 240.0;
    intr.width = 640;
    intr.height = 480;
    return intr;
}

struct SceneAssets {
    Image<std::uint16_t> depth_mm;
    Image<std::uint8_t> saliency;
    std::vector<BinaryMask> masks;
    std::vector<replay::MaskEntry> entries;
};

SceneAssets build_scene(const std::vector<SceneObject>& objects,
                        const geom::CameraIntrinsics& intr) {
    SceneAssets assets;
    assets.depth_mm = Image<std::uint16_t>(intr.width, intr.height,
                                           static_cast<std::uint16_t>(kBackdropZ * 1000.0));
    ProbabilityImage saliency(intr.width, intr.height, 0.0);

    for (std::size_t k = 0; k < objects.size(); ++k) {
        const auto& obj = objects[k];
        const double u0 = intr.fx * obj.pos.x() / obj.pos.z() + intr.cx;
        const double v0 = intr.fy * obj.pos.y() / obj.pos.z() + intr.cy;
        const double ru = obj.half_u_m / obj.pos.z() * intr.fx;
        const double rv = obj.half_v_m / obj.pos.z() * intr.fy;

        BinaryMask mask(intr.width, intr.height, 0);
        const int x0 = std::max(0, static_cast<int>(std::floor(u0 - ru - 1)));
        const int x1 = std::min(intr.width - 1, static_cast<int>(std::ceil(u0 + ru + 1)));
        const int y0 = std::max(0, static_cast<int>(std::floor(v0 - rv - 1)));
        const int y1 = std::min(intr.height - 1, static_cast<int>(std::ceil(v0 + rv + 1)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double du = (x - u0) / ru;
                const double dv = (y - v0) / rv;
                const bool inside = obj.round ? (du * du + dv * dv <= 1.0)
                                              : (std::abs(du) <= 1.0 && std::abs(dv) <= 1.0);
                if (!inside) continue;
                mask.at(x, y) = 1;
                assets.depth_mm.at(x, y) =
                    static_cast<std::uint16_t>(std::lround(obj.pos.z() * 1000.0));
            }
        }

        // Saliency blob; only the strongest core survives the 0.9 threshold
        // after the global stretch, weaker blobs stay single-detector.
        const double sigma = 0.8 * std::max(ru, rv);
        for (int y = 0; y < intr.height; ++y) {
            for (int x = 0; x < intr.width; ++x) {
                const double d2 = (x - u0) * (x - u0) + (y - v0) * (y - v0);
                const double g = obj.saliency_amp * std::exp(-d2 / (2.0 * sigma * sigma));
                saliency.at(x, y) = std::max(saliency.at(x, y), g);
            }
        }

        replay::MaskEntry entry;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "mask_%02zu.pgm", k);
        entry.mask_file = buf;
        entry.confidence = obj.confidence;
        entry.prompt_u = u0;
        entry.prompt_v = v0;
        assets.entries.push_back(entry);
        assets.masks.push_back(std::move(mask));
    }

    assets.saliency = Image<std::uint8_t>(intr.width, intr.height, 0);
    for (std::size_t i = 0; i < saliency.data.size(); ++i)
        assets.saliency.data[i] =
            static_cast<std::uint8_t>(std::lround(std::clamp(saliency.data[i], 0.0, 1.0) * 255.0));
    return assets;
}

struct TcpLeg {
    Eigen::Vector3d target{0, 0, 0};
    double speed = 0.4;
    double dwell = 0.0;
};

std::vector<OdoSample> tcp_trajectory(const Eigen::Vector3d& start,
                                      const std::vector<TcpLeg>& legs, double t0, Rng& rng,
                                      double noise_sigma, double* end_t) {
    constexpr double kDt = 0.05; // 20 Hz
    std::vector<OdoSample> samples;
    Eigen::Vector3d pos = start;
    double t = t0;
    auto emit = [&](const Eigen::Vector3d& vel) {
        OdoSample s;
        s.t = t;
        s.frame = "camera";
        s.x = pos.x() + rng.normal(0.0, noise_sigma);
        s.y = pos.y() + rng.normal(0.0, noise_sigma);
        s.z = pos.z() + rng.normal(0.0, noise_sigma);
        s.vx = vel.x();
        s.vy = vel.y();
        s.vz = vel.z();
        samples.push_back(s);
        t += kDt;
    };

    for (const auto& leg : legs) {
        while (true) {
            const Eigen::Vector3d delta = leg.target - pos;
            const double dist = delta.norm();
            if (dist < 5e-4) break;
            const Eigen::Vector3d dir = delta / dist;
            const double speed = std::max(0.05, leg.speed * std::min(1.0, dist / 0.10));
            emit(dir * speed);
            pos += dir * std::min(speed * kDt, dist);
        }
        const int dwell_samples = static_cast<int>(std::lround(leg.dwell / kDt));
        for (int i = 0; i < dwell_samples; ++i) emit(Eigen::Vector3d::Zero());
    }
    emit(Eigen::Vector3d::Zero());
    *end_t = samples.back().t;
    return samples;
}

/// Hover pose that zeroes the workspace-cylinder distance: directly over the
/// object, TCP depth just past the object top.
Eigen::Vector3d hover_over(const Eigen::Vector3d& obj_pos) {
    return {obj_pos.x(), obj_pos.y(), obj_pos.z() + 0.05};
}

// ---------------------------------------------------------------------------

struct TemplateBuild {
    OccupancyGrid grid;
    std::vector<OdoSample> base_samples;
    std::vector<std::pair<double, double>> gt_region;
    double nav_contact_t = 0.0;
    double nav_redirect_t = -1.0;

    std::vector<SceneObject> objects;
    int target_index = 0;
    std::vector<OdoSample> tcp_samples;
    double manip_command_t = 0.0;
    double manip_redirect_t = -1.0;
};

OccupancyGrid blank_grid() {
    return OccupancyGrid(kGridSide, kGridSide, 0.05, kGridOrigin, kGridOrigin, CellState::Free);
}

/// Adds clutter shared by every nav template: a small component in the
/// lowest row-major corner keeps the early (pre-synergy) argmax away from
/// every scripted region.
void add_decoy(OccupancyGrid& grid) { add_cluster(grid, -2.55, -2.55); }

TemplateBuild build_t1(const ScenarioSpec& spec) {
    TemplateBuild b;
    b.grid = blank_grid();
    add_decoy(b.grid);
    add_cluster(b.grid, 1.5, 1.0);   // target area
    add_cluster(b.grid, -1.5, 1.5);  // distractor, far from the drive corridor

    Rng base_rng(sub_seed(spec.seed, "base-odometry"));
    b.base_samples = base_trajectory(0.0, 0.0, {{1.08, 0.72, 3.0}}, 0.5, base_rng,
                                     spec.base_noise_sigma, &b.nav_contact_t);
    b.gt_region = region_square(1.5, 1.0, 1.25);

    b.objects = {
        {{0.05, 0.00, 1.00}, 0.025, 0.025, false, 1.0, 0.92}, // target cube
        {{-0.24, 0.06, 1.05}, 0.025, 0.025, false, 0.55, 0.85},
    };
    b.target_index = 0;

    Rng tcp_rng(sub_seed(spec.seed, "tcp-odometry"));
    const double t0 = b.nav_contact_t + 35.0;
    b.tcp_samples = tcp_trajectory({0.0, -0.25, 0.75},
                                   {{hover_over(b.objects[0].pos), 0.4, 6.0}}, t0, tcp_rng,
                                   spec.tcp_noise_sigma, &b.manip_command_t);
    return b;
}

TemplateBuild build_t2(const ScenarioSpec& spec) {
    TemplateBuild b;
    b.grid = blank_grid();
    add_decoy(b.grid);
    add_cluster(b.grid, 1.5, 0.5);    // first commanded area
    add_cluster(b.grid, -1.5, -0.5);  // final target (lower rows: wins ties)

    Rng base_rng(sub_seed(spec.seed, "base-odometry"));
    // Drive to the first area, dwell through the verbal cue, then cross to
    // the final one.
    std::vector<OdoSample> first_part;
    double t_after_first = 0.0;
    first_part = base_trajectory(0.0, 1.5, {{1.07, 0.79, 2.0}}, 0.5, base_rng,
                                 spec.base_noise_sigma, &t_after_first);
    b.nav_redirect_t = t_after_first;
    double t_end = 0.0;
    auto second_part = base_trajectory(1.07, 0.79, {{-1.06, -0.33, 3.0}}, 0.5, base_rng,
                                       spec.base_noise_sigma, &t_end);
    b.base_samples = std::move(first_part);
    for (auto& s : second_part) {
        s.t += t_after_first + 0.1;
        b.base_samples.push_back(s);
    }
    b.nav_contact_t = b.base_samples.back().t;
    b.gt_region = region_square(-1.5, -0.5, 1.25);

    b.objects = {
        {{0.05, 0.00, 1.00}, 0.025, 0.025, false, 1.0, 0.92},
        {{-0.24, 0.06, 1.05}, 0.025, 0.025, false, 0.55, 0.85},
    };
    b.target_index = 0;

    Rng tcp_rng(sub_seed(spec.seed, "tcp-odometry"));
    const double t0 = b.nav_contact_t + 35.0;
    b.tcp_samples = tcp_trajectory({0.0, -0.25, 0.75},
                                   {{hover_over(b.objects[0].pos), 0.4, 6.0}}, t0, tcp_rng,
                                   spec.tcp_noise_sigma, &b.manip_command_t);
    return b;
}

TemplateBuild build_t3(const ScenarioSpec& spec) {
    TemplateBuild b;
    b.grid = blank_grid();
    add_decoy(b.grid);
    add_cluster(b.grid, 1.5, 1.0);

    Rng base_rng(sub_seed(spec.seed, "base-odometry"));
    b.base_samples = base_trajectory(0.0, 0.0, {{1.08, 0.72, 2.0}}, 0.5, base_rng,
                                     spec.base_noise_sigma, &b.nav_contact_t);
    b.gt_region = region_square(1.5, 1.0, 1.25);

    b.objects = {
        {{0.02, 0.02, 1.00}, 0.025, 0.025, false, 1.0, 0.92},   // first instructed cube
        {{0.22, -0.03, 1.02}, 0.025, 0.025, false, 0.55, 0.90}, // redirected target
        {{-0.20, 0.10, 1.08}, 0.025, 0.025, false, 0.50, 0.85},
    };
    b.target_index = 1;

    Rng tcp_rng(sub_seed(spec.seed, "tcp-odometry"));
    const double t0 = b.nav_contact_t + 35.0;
    const Eigen::Vector3d start{0.0, -0.25, 0.75};
    const Eigen::Vector3d hover_a = hover_over(b.objects[0].pos);
    const Eigen::Vector3d hover_b = hover_over(b.objects[1].pos);

    // First reach the instructed cube and linger, then the scripted cue
    // moves the wrist to the neighbouring cube.
    double t_at_a = 0.0;
    auto part1 = tcp_trajectory(start, {{hover_a, 0.4, 4.0}}, t0, tcp_rng,
                                spec.tcp_noise_sigma, &t_at_a);
    b.manip_redirect_t = t_at_a;
    double t_end = 0.0;
    auto part2 = tcp_trajectory(hover_a, {{hover_b, 0.5, 6.0}}, t_at_a + 0.05, tcp_rng,
                                spec.tcp_noise_sigma, &t_end);
    b.tcp_samples = std::move(part1);
    b.tcp_samples.insert(b.tcp_samples.end(), part2.begin(), part2.end());
    b.manip_command_t = t_end;
    return b;
}

TemplateBuild build_t4(const ScenarioSpec& spec) {
    TemplateBuild b;
    b.grid = blank_grid();
    add_decoy(b.grid);
    add_cluster(b.grid, -1.2, 1.2);

    Rng base_rng(sub_seed(spec.seed, "base-odometry"));
    b.base_samples = base_trajectory(0.0, 0.0, {{-0.85, 0.85, 3.0}}, 0.5, base_rng,
                                     spec.base_noise_sigma, &b.nav_contact_t);
    b.gt_region = region_square(-1.2, 1.2, 1.25);

    b.objects = {
        {{0.10, 0.05, 1.00}, 0.015, 0.075, false, 0.8, 0.92},   // drill: slim bar, graspable
        {{-0.18, 0.00, 1.05}, 0.05, 0.05, false, 1.0, 0.90},    // box: too wide in every direction
        {{-0.05, -0.14, 0.95}, 0.006, 0.060, false, 0.6, 0.80}, // marker
    };
    b.target_index = 0;

    Rng tcp_rng(sub_seed(spec.seed, "tcp-odometry"));
    const double t0 = b.nav_contact_t + 35.0;
    b.tcp_samples = tcp_trajectory({0.0, -0.25, 0.75},
                                   {{hover_over(b.objects[0].pos), 0.4, 6.0}}, t0, tcp_rng,
                                   spec.tcp_noise_sigma, &b.manip_command_t);
    return b;
}

TemplateBuild build_t5(const ScenarioSpec& spec) {
    TemplateBuild b;
    b.grid = blank_grid();
    add_decoy(b.grid);
    add_cluster(b.grid, -1.5, 0.5);  // first commanded area
    add_cluster(b.grid, 1.5, -0.5);  // final area (lower rows)

    Rng base_rng(sub_seed(spec.seed, "base-odometry"));
    std::vector<OdoSample> first_part;
    double t_after_first = 0.0;
    first_part = base_trajectory(0.0, 1.5, {{-1.07, 0.79, 2.0}}, 0.5, base_rng,
                                 spec.base_noise_sigma, &t_after_first);
    b.nav_redirect_t = t_after_first;
    double t_end = 0.0;
    auto second_part = base_trajectory(-1.07, 0.79, {{1.06, -0.33, 3.0}}, 0.5, base_rng,
                                       spec.base_noise_sigma, &t_end);
    b.base_samples = std::move(first_part);
    for (auto& s : second_part) {
        s.t += t_after_first + 0.1;
        b.base_samples.push_back(s);
    }
    b.nav_contact_t = b.base_samples.back().t;
    b.gt_region = region_square(1.5, -0.5, 1.25);

    b.objects = {
        // Oversized can: 0.12 m across, fails every gripper test.
        {{-0.02, 0.02, 1.00}, 0.06, 0.06, true, 1.0, 0.95},
        // Fruit: 0.05 m, comfortably pinchable.
        {{0.20, -0.04, 1.02}, 0.025, 0.025, true, 0.55, 0.90},
    };
    b.target_index = 1;

    Rng tcp_rng(sub_seed(spec.seed, "tcp-odometry"));
    const double t0 = b.nav_contact_t + 35.0;
    const Eigen::Vector3d start{0.0, -0.25, 0.75};
    const Eigen::Vector3d hover_can = hover_over(b.objects[0].pos);
    const Eigen::Vector3d hover_fruit = hover_over(b.objects[1].pos);

    double t_at_can = 0.0;
    auto part1 = tcp_trajectory(start, {{hover_can, 0.4, 4.0}}, t0, tcp_rng,
                                spec.tcp_noise_sigma, &t_at_can);
    b.manip_redirect_t = t_at_can;
    double t_end2 = 0.0;
    auto part2 = tcp_trajectory(hover_can, {{hover_fruit, 0.5, 6.0}}, t_at_can + 0.05, tcp_rng,
                                spec.tcp_noise_sigma, &t_end2);
    b.tcp_samples = std::move(part1);
    b.tcp_samples.insert(b.tcp_samples.end(), part2.begin(), part2.end());
    b.manip_command_t = t_end2;
    return b;
}

} // namespace

Template parse_template(const std::string& name) {
    if (name == "t1_direct") return Template::T1Direct;
    if (name == "t2_base_redirect") return Template::T2BaseRedirect;
    if (name == "t3_manip_redirect") return Template::T3ManipRedirect;
    if (name == "t4_tool") return Template::T4Tool;
    if (name == "t5_infeasible") return Template::T5Infeasible;
    throw ConfigError("unknown scenario template '" + name + "'");
}

std::string template_name(Template tpl) {
    switch (tpl) {
    case Template::T1Direct: return "t1_direct";
    case Template::T2BaseRedirect: return "t2_base_redirect";
    case Template::T3ManipRedirect: return "t3_manip_redirect";
    case Template::T4Tool: return "t4_tool";
    case Template::T5Infeasible: return "t5_infeasible";
    }
    throw ConfigError("unknown scenario template");
}

ScenarioInfo generate_scenario(const ScenarioSpec& spec, const Config& config,
                               const std::filesystem::path& out_dir) {
    TemplateBuild b;
    switch (spec.tpl) {
    case Template::T1Direct: b = build_t1(spec); break;
    case Template::T2BaseRedirect: b = build_t2(spec); break;
    case Template::T3ManipRedirect: b = build_t3(spec); break;
    case Template::T4Tool: b = build_t4(spec); break;
    case Template::T5Infeasible: b = build_t5(spec); break;
    }

    std::filesystem::create_directories(out_dir);
    const auto intr = scene_intrinsics();
    const SceneAssets assets = build_scene(b.objects, intr);

    save_occupancy_grid(b.grid, out_dir / "grid.pgm", out_dir / "grid.meta");
    replay::write_odometry_jsonl(b.base_samples, out_dir / "base_odometry.jsonl");
    replay::write_odometry_jsonl(b.tcp_samples, out_dir / "tcp_odometry.jsonl");
    io::write_pgm8(assets.saliency, out_dir / "saliency.pgm");
    io::write_pgm16(assets.depth_mm, out_dir / "depth.pgm");
    io::write_keyvalue({{"units", "millimeters"}}, out_dir / "depth.pgm.meta");
    for (std::size_t k = 0; k < assets.masks.size(); ++k)
        io::write_pgm8(assets.masks[k], out_dir / assets.entries[k].mask_file);
    replay::write_masks_manifest(assets.entries, out_dir / "masks.jsonl");

    std::map<std::string, std::string> intr_kv;
    char buf[40];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        intr_kv[key] = buf;
    };
    put("fx", intr.fx);
    put("fy", intr.fy);
    put("cx", intr.cx);
    put("cy", intr.cy);
    intr_kv["width"] = std::to_string(intr.width);
    intr_kv["height"] = std::to_string(intr.height);
    io::write_keyvalue(intr_kv, out_dir / "intrinsics.txt");

    SessionLog log;
    log.dir = out_dir;
    NavPhase nav;
    nav.grid_pgm = out_dir / "grid.pgm";
    nav.grid_meta = out_dir / "grid.meta";
    nav.contact_t = b.nav_contact_t;
    nav.ground_truth_region.vertices = b.gt_region;
    nav.odometry = b.base_samples;
    log.nav = std::move(nav);

    ManipPhase manip;
    manip.saliency_pgm = out_dir / "saliency.pgm";
    manip.depth_pgm = out_dir / "depth.pgm";
    manip.intrinsics_txt = out_dir / "intrinsics.txt";
    manip.masks = assets.entries;
    manip.command_t = b.manip_command_t;
    const auto& target = b.objects[b.target_index].pos;
    manip.ground_truth_xyz = {{target.x(), target.y(), target.z()}};
    manip.ground_truth_object = 0; // refined below from the actual proposals
    manip.odometry = b.tcp_samples;

    // Resolve the proposal id the perception stack assigns to the target.
    const auto perception = replay::run_perception(manip, config);
    manip.ground_truth_object = perception.ground_truth_id;
    log.manip = std::move(manip);

    if (b.nav_redirect_t >= 0.0) log.annotations["nav_redirect_t"] = b.nav_redirect_t;
    if (b.manip_redirect_t >= 0.0) log.annotations["manip_redirect_t"] = b.manip_redirect_t;

    replay::write_session_manifest(log, out_dir / "manifest.json");

    ScenarioInfo info;
    info.name = template_name(spec.tpl);
    info.nav_redirect_t = b.nav_redirect_t;
    info.manip_redirect_t = b.manip_redirect_t;
    info.nav_contact_t = b.nav_contact_t;
    info.manip_command_t = b.manip_command_t;
    return info;
}

} // namespace guider::scenario
