#include "guider/replay.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "guider/heatmap.hpp"
#include "guider/io/pgm_io.hpp"
#include "guider/logging.hpp"
#include "guider/nav_belief.hpp"
#include "guider/rng.hpp"
#include "guider/scene_geometry.hpp"

namespace guider::replay {

namespace {

geom::CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
    const auto kv = io::read_keyvalue(path);
    auto fetch = [&](const char* key) {
        const auto it = kv.find(key);
        if (it == kv.end())
            throw InputError("intrinsics missing key '" + std::string(key) + "': " + path.string());
        return std::stod(it->second);
    };
    geom::CameraIntrinsics intr;
    intr.fx = fetch("fx");
    intr.fy = fetch("fy");
    intr.cx = fetch("cx");
    intr.cy = fetch("cy");
    intr.width = static_cast<int>(fetch("width"));
    intr.height = static_cast<int>(fetch("height"));
    intr.validate();
    return intr;
}

DepthImage load_depth_m(const std::filesystem::path& path) {
    const auto raw = io::read_pgm16(path);
    DepthImage depth(raw.width, raw.height, 0.0f);
    for (std::size_t i = 0; i < raw.data.size(); ++i)
        depth.data[i] = raw.data[i] / 1000.0f; // millimeters on disk
    return depth;
}

ProbabilityImage load_saliency(const std::filesystem::path& path) {
    const auto raw = io::read_pgm8(path);
    ProbabilityImage sal(raw.width, raw.height, 0.0);
    for (std::size_t i = 0; i < raw.data.size(); ++i) sal.data[i] = raw.data[i] / 255.0;
    return sal;
}

PhaseTimeline run_nav_phase(const NavPhase& phase, const Config& config) {
    const OccupancyGrid grid = load_occupancy_grid(phase.grid_pgm, phase.grid_meta);
    nav::NavBeliefState state = nav::init_base_layer(grid, config.nav);

    PhaseTimeline timeline;
    timeline.contact_t = phase.contact_t;
    for (const auto& sample : phase.odometry) {
        nav::nav_step(state, {sample.t, sample.x, sample.y, sample.vx, sample.vy}, config.nav);
        const auto field = nav::combined_belief(state);
        const auto peak = nav::predicted_area(field);
        timeline.t.push_back(sample.t);
        timeline.predicted.push_back(static_cast<long long>(field.index(peak.x, peak.y)));
        const double wx = state.cell_center_x(peak.x);
        const double wy = state.cell_center_y(peak.y);
        timeline.correct.push_back(phase.ground_truth_region.contains(wx, wy) ? 1 : 0);
    }
    return timeline;
}

struct ManipRun {
    PerceptionResult perception;
    PhaseTimeline timeline;
    std::vector<eef::TraceRow> trace;
    std::vector<std::vector<double>> probs;
};

struct StageDumper {
    std::filesystem::path dir;
    bool enabled = false;
    int counter = 0;

    void dump(const ProbabilityImage& p, const char* name) {
        if (!enabled) return;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%02d_%s.pgm", counter++, name);
        io::write_field_pgm(p, dir / buf);
    }
    void dump_mask(const BinaryMask& m, const char* name) {
        if (!enabled) return;
        ProbabilityImage p(m.width, m.height, 0.0);
        for (std::size_t i = 0; i < m.data.size(); ++i) p.data[i] = m.data[i] ? 1.0 : 0.0;
        dump(p, name);
    }
};

ManipRun run_manip_phase(const ManipPhase& phase, const Config& config,
                         const ReplayOptions& options) {
    ManipRun run;
    run.perception = run_perception(phase, config, options);
    const int gt_id = run.perception.ground_truth_id;
    if (gt_id < 0 || gt_id >= static_cast<int>(run.perception.proposals.size()))
        throw InputError("replay: ground-truth object id out of range");

    // EEF evolution over the TCP stream.
    std::vector<double> times;
    std::vector<Eigen::Vector3d> positions;
    times.reserve(phase.odometry.size());
    for (const auto& s : phase.odometry) {
        times.push_back(s.t);
        positions.emplace_back(s.x, s.y, s.z);
    }
    const auto derivatives = eef::estimate_derivatives(times, positions);

    std::vector<eef::ObjectBelief> beliefs;
    beliefs.reserve(run.perception.proposals.size());
    for (const auto& prop : run.perception.proposals)
        beliefs.push_back(eef::ObjectBelief::make(prop.id, prop.centroid, prop.score, config.eef));

    eef::EefTracker tracker(std::move(beliefs), config.eef);
    run.timeline.contact_t = phase.command_t;
    for (std::size_t i = 0; i < phase.odometry.size(); ++i) {
        eef::EefState state;
        state.q = positions[i];
        state.qdot = derivatives.velocity[i];
        state.qddot = derivatives.acceleration[i];
        state.t = times[i];
        tracker.feed(state);

        run.timeline.t.push_back(times[i]);
        const int top = tracker.top_object();
        run.timeline.predicted.push_back(top);
        run.timeline.correct.push_back(top == gt_id ? 1 : 0);
        std::vector<double> probs(tracker.objects().size(), 0.0);
        for (const auto& obj : tracker.objects()) probs[obj.id] = obj.p;
        run.probs.push_back(std::move(probs));
    }
    run.trace = tracker.trace();
    return run;
}

/// Geometry chain on the depth snapshot (plane removal, clustering, prompt
/// projection); diagnostic output mirroring what fed the instance masks.
void dump_prompts(const ManipPhase& phase, const Config& config, const ReplayOptions& options) {
    const auto intr = load_intrinsics(phase.intrinsics_txt);
    const DepthImage depth = load_depth_m(phase.depth_pgm);
    const auto cloud = geom::reproject_depth(depth, intr);
    if (cloud.size() < 3) return;

    const auto [plane, residual] =
        geom::fit_plane_ransac(cloud, config.geom, sub_seed(options.seed, "plane-ransac"));
    const auto normals =
        residual.empty() ? std::vector<Eigen::Vector3d>{}
                         : geom::estimate_normals(residual, config.geom.normal_radius,
                                                  config.geom.normal_knn);
    const auto clusters = geom::cluster_objects(residual, normals, config.geom);

    std::ofstream out(options.out_dir / "stages" / "prompts.jsonl");
    for (const auto& cluster : clusters) {
        if (!(cluster.centroid.z() > 0.0)) continue;
        const auto uv = geom::project_centroid(cluster.centroid, intr);
        nlohmann::json j;
        j["u"] = uv.x();
        j["v"] = uv.y();
        j["size"] = cluster.indices.size();
        j["centroid"] = {cluster.centroid.x(), cluster.centroid.y(), cluster.centroid.z()};
        out << j.dump() << "\n";
    }
}

} // namespace

PerceptionResult run_perception(const ManipPhase& phase, const Config& config,
                                const ReplayOptions& options) {
    const auto intr = load_intrinsics(phase.intrinsics_txt);
    const DepthImage depth = load_depth_m(phase.depth_pgm);
    require_same_shape(depth.width, depth.height, intr.width, intr.height, "depth image");
    const ProbabilityImage saliency = load_saliency(phase.saliency_pgm);
    require_same_shape(saliency.width, saliency.height, intr.width, intr.height, "saliency map");

    StageDumper stages;
    if (options.dump_stages && !options.out_dir.empty()) {
        stages.enabled = true;
        stages.dir = options.out_dir / "stages";
        std::filesystem::create_directories(stages.dir);
    }

    // Detector masks: thresholded saliency plus the filtered instance masks.
    const BinaryMask detector_saliency = fusion::normalize_and_threshold(saliency, config.fusion);
    std::vector<fusion::ScoredMask> scored;
    scored.reserve(phase.masks.size());
    const auto& dir = phase.saliency_pgm.parent_path();
    for (const auto& entry : phase.masks) {
        fusion::ScoredMask sm;
        const auto raw = io::read_pgm8(dir / entry.mask_file);
        sm.mask = BinaryMask(raw.width, raw.height, 0);
        for (std::size_t i = 0; i < raw.data.size(); ++i) sm.mask.data[i] = raw.data[i] != 0;
        sm.confidence = entry.confidence;
        scored.push_back(std::move(sm));
    }
    const BinaryMask detector_instances =
        fusion::filter_and_merge_masks(scored, intr.width, intr.height, config.fusion);

    PerceptionResult perception;
    perception.fused = fusion::fuse_2d(detector_saliency, detector_instances, depth,
                                       config.fusion);
    stages.dump(perception.fused.p, "fused_saliency");

    // Grasp feasibility per valid instance mask.
    perception.feasibility = grasp::FeasibilityMasks(intr.width, intr.height);
    if (options.ablate_feasibility) {
        auto& f = perception.feasibility;
        for (auto* m : {&f.bbox, &f.morph, &f.adv_obj, &f.adv_rect})
            std::fill(m->data.begin(), m->data.end(), std::uint8_t{1});
    } else {
        const double max_area =
            config.fusion.max_area_frac * static_cast<double>(intr.width) * intr.height;
        for (const auto& sm : scored) {
            if (sm.confidence < config.fusion.min_confidence) continue;
            if (static_cast<double>(maskops::count_set(sm.mask)) > max_area) continue;
            if (maskops::count_set(sm.mask) == 0) continue;
            const auto obj = grasp::make_object_mask(sm.mask, depth, intr.fx);
            const auto feas = grasp::evaluate_object(obj, config.gripper);
            grasp::accumulate_masks(perception.feasibility, obj, feas);
        }
    }
    stages.dump_mask(perception.feasibility.bbox, "mask_bbox");
    stages.dump_mask(perception.feasibility.morph, "mask_morph");
    stages.dump_mask(perception.feasibility.adv_obj, "mask_adv_obj");
    stages.dump_mask(perception.feasibility.adv_rect, "mask_adv_rect");

    // Pixel cascade, fixed stage order.
    cascade::CascadeState cas(perception.fused.p);
    cas.centre_bias(intr, config.cascade);
    stages.dump(cas.probs(), "centre_bias");
    cas.apply_mask(perception.feasibility.bbox, config.cascade);
    stages.dump(cas.probs(), "after_bbox");
    cas.apply_mask(perception.feasibility.morph, config.cascade);
    stages.dump(cas.probs(), "after_morph");
    cas.apply_mask(perception.feasibility.adv_obj, config.cascade);
    stages.dump(cas.probs(), "after_adv_obj");
    cas.apply_mask(perception.feasibility.adv_rect, config.cascade);
    stages.dump(cas.probs(), "after_adv_rect");
    cas.depth_weight(perception.fused.zbuffer, config.cascade);
    stages.dump(cas.probs(), "depth_weight");
    cas.floor_probs(config.cascade);
    stages.dump(cas.probs(), "floored");
    perception.p_star = cas.probs();

    perception.proposals = cascade::pool_objects(perception.p_star, perception.fused.zbuffer,
                                                 intr, config.cascade);
    if (stages.enabled) {
        ProbabilityImage g(intr.width, intr.height, 0.0);
        for (const auto& prop : perception.proposals)
            for (const int idx : prop.pixels) g.data[idx] = prop.score;
        stages.dump(g, "proposal_scores");
    }

    if (perception.proposals.empty())
        throw InputError("replay: no object proposals survived the cascade");

    int gt_id = phase.ground_truth_object;
    if (phase.ground_truth_xyz) {
        const Eigen::Vector3d target((*phase.ground_truth_xyz)[0], (*phase.ground_truth_xyz)[1],
                                     (*phase.ground_truth_xyz)[2]);
        double best = -1.0;
        for (const auto& prop : perception.proposals) {
            const double d = (prop.centroid - target).norm();
            if (best < 0.0 || d < best) {
                best = d;
                gt_id = prop.id;
            }
        }
    }
    perception.ground_truth_id = gt_id;
    return perception;
}

ReplayResult replay(const SessionLog& log, const Config& config, const ReplayOptions& options) {
    config.validate();
    ReplayResult result;

    const bool want_nav = options.phase != Phase::Manip;
    const bool want_manip = options.phase != Phase::Nav;

    if (want_nav && log.nav) {
        log::info("replaying navigation phase (%zu samples)", log.nav->odometry.size());
        result.nav = run_nav_phase(*log.nav, config);
    }
    if (want_manip && log.manip) {
        log::info("replaying manipulation phase (%zu samples)", log.manip->odometry.size());
        auto run = run_manip_phase(*log.manip, config, options);
        result.perception = std::move(run.perception);
        result.manip = std::move(run.timeline);
        result.eef_trace = std::move(run.trace);
        result.manip_probs = std::move(run.probs);
        if (options.dump_stages && !options.out_dir.empty())
            dump_prompts(*log.manip, config, options);
    }
    return result;
}

PhaseMetrics compute_phase_metrics(const PhaseTimeline& timeline, double hold) {
    PhaseMetrics m;
    m.contact_t = timeline.contact_t;
    m.rtcp = metrics::rtcp(timeline.t, timeline.correct, timeline.contact_t, hold);
    if (m.rtcp) m.first_confident_t = timeline.contact_t - *m.rtcp;
    m.stability = metrics::stability_percent(timeline.t, timeline.correct, timeline.contact_t);
    return m;
}

namespace {

void write_timeline_csv(const PhaseTimeline& timeline,
                        const std::vector<std::vector<double>>* probs,
                        const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "t,predicted,correct";
    if (probs != nullptr && !probs->empty()) {
        for (std::size_t i = 0; i < probs->front().size(); ++i) out << ",p_" << i;
    }
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < timeline.t.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", timeline.t[i]);
        out << buf << "," << timeline.predicted[i] << ","
            << static_cast<int>(timeline.correct[i]);
        if (probs != nullptr && !probs->empty()) {
            for (const double p : (*probs)[i]) {
                std::snprintf(buf, sizeof(buf), "%.17g", p);
                out << "," << buf;
            }
        }
        out << "\n";
    }
}

void write_metrics_csv(const ReplayResult& result, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "phase,rtcp,stability,first_confident_t,contact_t\n";
    char buf[64];
    auto emit = [&](const char* phase, const PhaseMetrics& m) {
        out << phase << ",";
        if (m.rtcp) {
            std::snprintf(buf, sizeof(buf), "%.17g", *m.rtcp);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", m.stability);
        out << "," << buf << ",";
        if (m.first_confident_t) {
            std::snprintf(buf, sizeof(buf), "%.17g", *m.first_confident_t);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", m.contact_t);
        out << "," << buf << "\n";
    };
    if (result.nav) emit("navigation", compute_phase_metrics(*result.nav));
    if (result.manip) emit("manipulation", compute_phase_metrics(*result.manip));
}

void write_trace_csv(const std::vector<eef::TraceRow>& trace,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "t,object_id,p,d,app,in_topk\n";
    char buf[64];
    for (const auto& row : trace) {
        std::snprintf(buf, sizeof(buf), "%.17g", row.t);
        out << buf << "," << row.object_id << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", row.p);
        out << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", row.d);
        out << buf << "," << static_cast<int>(row.approaching) << ","
            << static_cast<int>(row.in_topk) << "\n";
    }
}

void write_proposals_jsonl(const std::vector<cascade::ObjectProposal>& proposals,
                           const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& prop : proposals) {
        nlohmann::json j;
        j["id"] = prop.id;
        j["g"] = prop.score;
        j["raw_g"] = prop.raw_score;
        j["centroid_xyz"] = {prop.centroid.x(), prop.centroid.y(), prop.centroid.z()};
        j["pixels"] = prop.pixel_count;
        out << j.dump() << "\n";
    }
}

} // namespace

void write_outputs(const ReplayResult& result, const Config& config,
                   const ReplayOptions& options) {
    (void)config;
    if (options.out_dir.empty()) return;
    std::filesystem::create_directories(options.out_dir);

    if (result.nav) write_timeline_csv(*result.nav, nullptr, options.out_dir / "timeline_nav.csv");
    if (result.manip) {
        write_timeline_csv(*result.manip, &result.manip_probs,
                           options.out_dir / "timeline_manip.csv");
        write_trace_csv(result.eef_trace, options.out_dir / "eef_trace.csv");
    }
    if (result.perception)
        write_proposals_jsonl(result.perception->proposals, options.out_dir / "proposals.jsonl");
    write_metrics_csv(result, options.out_dir / "metrics.csv");

    std::ofstream summary(options.out_dir / "summary.txt");
    auto describe = [&](const char* name, const PhaseTimeline& timeline) {
        const auto m = compute_phase_metrics(timeline);
        summary << name << ": ";
        if (m.rtcp) summary << "rtcp=" << *m.rtcp << " s, ";
        else summary << "rtcp=n/a, ";
        summary << "stability=" << m.stability << " %, contact_t=" << m.contact_t << " s\n";
    };
    if (result.nav) describe("navigation", *result.nav);
    if (result.manip) describe("manipulation", *result.manip);
}

} // namespace guider::replay
