#pragma once

#include <Eigen/Core>
#include <vector>

#include "guider/errors.hpp"

namespace guider::eef {

struct EefParams {
    double grip_radius = 0.028;   // r_g, upright-cylinder radius, meters
    double grip_height = 0.10;    // h_g, cylinder height below the TCP
    double alpha_growth = 0.08;
    double alpha_decay = 0.80;
    double gamma_v = 0.10;
    double gamma_a = 0.05;
    double delta = 0.10;          // distance softening, meters
    double kappa = 10.0;          // growth divisor for low-evidence objects
    double p_cap = 0.30;          // ceiling for low-evidence objects
    double low_evidence_threshold = 0.05; // p_init below this marks low evidence
    double dt = 0.004;            // integrator step, seconds
    double beta_topk = 0.002;     // max per-step drop inside the top-K set
    double beta_other = 0.005;
    int top_k = 2;
    double predict_horizon = 0.3; // tau for the TCP lookahead, seconds
    double p_max = 0.99;
    double approach_snap = 0.005; // treat anything closer as approaching, meters

    void validate() const {
        if (!(grip_radius > 0.0) || !(grip_height > 0.0))
            throw ConfigError("eef: cylinder dimensions must be > 0");
        if (!(alpha_growth > 0.0) || !(alpha_decay > 0.0) || !(delta > 0.0))
            throw ConfigError("eef: growth/decay constants must be > 0");
        if (!(gamma_v >= 0.0) || !(gamma_a >= 0.0))
            throw ConfigError("eef: velocity/acceleration weights must be >= 0");
        if (!(kappa >= 1.0)) throw ConfigError("eef: kappa must be >= 1");
        if (!(p_cap > 0.0 && p_cap < p_max && p_max <= 1.0))
            throw ConfigError("eef: require 0 < p_cap < p_max <= 1");
        if (!(dt > 0.0) || !(predict_horizon >= 0.0))
            throw ConfigError("eef: time constants invalid");
        if (!(beta_topk > 0.0) || !(beta_other > 0.0))
            throw ConfigError("eef: beta biases must be > 0");
        if (top_k < 1) throw ConfigError("eef: top_k must be >= 1");
        if (!(approach_snap >= 0.0)) throw ConfigError("eef: approach_snap must be >= 0");
        if (!(low_evidence_threshold >= 0.0))
            throw ConfigError("eef: low_evidence_threshold must be >= 0");
    }
};

/// TCP state at one instant; derivatives come from finite differences over
/// the odometry sequence.
struct EefState {
    Eigen::Vector3d q{0, 0, 0};
    Eigen::Vector3d qdot{0, 0, 0};
    Eigen::Vector3d qddot{0, 0, 0};
    double t = 0.0;
};

struct ObjectBelief {
    int id = 0;
    Eigen::Vector3d centroid{0, 0, 0};
    double p = 0.0;
    double p_init = 0.0;
    double d_prev = 0.0;
    bool has_d_prev = false;
    bool low_evidence = false;

    static ObjectBelief make(int id, const Eigen::Vector3d& centroid, double g,
                             const EefParams& params) {
        ObjectBelief b;
        b.id = id;
        b.centroid = centroid;
        b.p = b.p_init = g;
        b.low_evidence = g < params.low_evidence_threshold;
        return b;
    }
};

/// Distance from a centroid to the gripper workspace cylinder (radius
/// grip_radius, vertical extent [z_e - grip_height, z_e]). Zero inside.
double cylinder_distance(const Eigen::Vector3d& centroid, const EefState& state,
                         const EefParams& params);

/// True when the distance shrank since the previous step or is below
/// approach_snap.
bool approach_indicator(double d, double d_prev, const EefParams& params);

struct GrowthDecay {
    double growth = 0.0;
    double decay = 0.0;
};

/// The growth/decay pair for one object. `not_app = 1 - app`: an approaching
/// object gets the full growth term and the smaller decay multiplier.
/// Low-evidence objects grow with alpha_growth / kappa.
GrowthDecay growth_decay(const ObjectBelief& obj, double d, bool approaching, double v,
                         double a, const EefParams& params);

/// Second-order extrapolation of the TCP predict_horizon ahead.
Eigen::Vector3d predict_tcp(const EefState& state, const EefParams& params);

/// Ids of the K objects nearest the predicted TCP, always unioned with the
/// single object nearest the current TCP. Distance ties break on lower id.
std::vector<int> top_k_set(const std::vector<ObjectBelief>& objects,
                           const Eigen::Vector3d& q_pred, const Eigen::Vector3d& q,
                           const EefParams& params);

/// One forward-Euler step of dt for every object:
/// p~ = p + dt (G - D); p <- clamp(min(max(p~, p - beta_i), p_max_i), 0, ..).
void step(std::vector<ObjectBelief>& objects, const EefState& state, const EefParams& params);

struct DerivativeEstimate {
    std::vector<Eigen::Vector3d> velocity;
    std::vector<Eigen::Vector3d> acceleration;
};

/// Finite differences over a (possibly non-uniform) timestamp sequence:
/// three-point divided differences, central in the interior, one-sided at the
/// ends. Throws InputError with fewer than 3 samples.
DerivativeEstimate estimate_derivatives(const std::vector<double>& t,
                                        const std::vector<Eigen::Vector3d>& q);

/// Trace row mirroring the CSV the replay harness writes.
struct TraceRow {
    double t = 0.0;
    int object_id = 0;
    double p = 0.0;
    double d = 0.0;
    bool approaching = false;
    bool in_topk = false;
};

/// Integrates beliefs across log samples, substepping at params.dt with the
/// TCP state held from the sample that opened each interval (zero-order
/// hold). Emits one trace row per object per fed sample.
class EefTracker {
public:
    EefTracker(std::vector<ObjectBelief> objects, const EefParams& params);

    /// Feeds the next odometry sample (strictly increasing t).
    void feed(const EefState& sample);

    const std::vector<ObjectBelief>& objects() const { return objects_; }
    const std::vector<TraceRow>& trace() const { return trace_; }

    /// Current argmax object id; ties break on lower id. -1 when empty.
    int top_object() const;

private:
    void emit_trace(double t, const EefState& state);

    std::vector<ObjectBelief> objects_;
    EefParams params_;
    std::vector<TraceRow> trace_;
    EefState last_;
    bool has_last_ = false;
};

} // namespace guider::eef
