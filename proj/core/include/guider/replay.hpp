#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "guider/cascade.hpp"
#include "guider/config.hpp"
#include "guider/eef.hpp"
#include "guider/fusion.hpp"
#include "guider/grasp.hpp"
#include "guider/metrics.hpp"
#include "guider/session_log.hpp"

namespace guider::replay {

enum class Phase { Nav, Manip, Both };

struct ReplayOptions {
    Phase phase = Phase::Both;
    bool dump_stages = false;
    /// Forces all four feasibility masks to all-ones inside the cascade;
    /// used to measure what the geometry checks buy.
    bool ablate_feasibility = false;
    std::filesystem::path out_dir; // empty: no files written
    std::uint64_t seed = 0;
};

/// One phase's prediction history. Predictions are piecewise constant from
/// each sample to the next.
struct PhaseTimeline {
    std::vector<double> t;
    std::vector<long long> predicted; // nav: row-major peak cell; manip: object id
    std::vector<std::uint8_t> correct;
    double contact_t = 0.0;
};

struct PerceptionResult {
    fusion::FusedSaliency fused;
    grasp::FeasibilityMasks feasibility;
    ProbabilityImage p_star;
    std::vector<cascade::ObjectProposal> proposals;
    int ground_truth_id = -1; // resolved against the proposal list
};

struct ReplayResult {
    std::optional<PhaseTimeline> nav;
    std::optional<PhaseTimeline> manip;
    std::optional<PerceptionResult> perception;
    std::vector<eef::TraceRow> eef_trace;
    std::vector<std::vector<double>> manip_probs; // probability vector per manip sample
};

/// Feeds the log through the pipeline: navigation layers per base sample,
/// then the manipulation perception stack once and the EEF evolution per TCP
/// sample. Deterministic given (log, config, seed).
ReplayResult replay(const SessionLog& log, const Config& config, const ReplayOptions& options);

/// The one-shot manipulation perception stack (fusion, feasibility, cascade,
/// pooling) without the EEF evolution. ground_truth_id is resolved when the
/// phase carries a target (by position when ground_truth_xyz is present).
PerceptionResult run_perception(const ManipPhase& phase, const Config& config,
                                const ReplayOptions& options = {});

struct PhaseMetrics {
    std::optional<double> rtcp;
    double stability = 0.0;
    std::optional<double> first_confident_t;
    double contact_t = 0.0;
};

PhaseMetrics compute_phase_metrics(const PhaseTimeline& timeline, double hold = 0.5);

/// Writes timeline/metrics CSVs (and stage dumps when requested) under
/// options.out_dir.
void write_outputs(const ReplayResult& result, const Config& config,
                   const ReplayOptions& options);

} // namespace guider::replay
