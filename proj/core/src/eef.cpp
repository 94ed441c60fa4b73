#include "guider/eef.hpp"

#include <algorithm>
#include <cmath>

namespace guider::eef {

double cylinder_distance(const Eigen::Vector3d& centroid, const EefState& state,
                         const EefParams& params) {
    const double rho = std::hypot(centroid.x() - state.q.x(), centroid.y() - state.q.y());
    const double z_min = state.q.z() - params.grip_height;
    const double z_max = state.q.z();
    const double radial = std::max(0.0, rho - params.grip_radius);
    const double vertical = std::max({0.0, z_min - centroid.z(), centroid.z() - z_max});
    return std::hypot(radial, vertical);
}

bool approach_indicator(double d, double d_prev, const EefParams& params) {
    return (d - d_prev) < 0.0 || d < params.approach_snap;
}

GrowthDecay growth_decay(const ObjectBelief& obj, double d, bool approaching, double v,
                         double a, const EefParams& params) {
    const double not_app = approaching ? 0.0 : 1.0;
    const double alpha_g = obj.low_evidence ? params.alpha_growth / params.kappa
                                            : params.alpha_growth;
    GrowthDecay gd;
    gd.growth = alpha_g / (d + params.delta) *
                (1.0 + params.gamma_v * v + params.gamma_a * a) * (1.0 - 0.7 * not_app);
    gd.decay = params.alpha_decay * (d + params.delta) *
               (1.0 + 0.3 * params.gamma_v * v + 0.3 * params.gamma_a * a) *
               (1.0 + 0.5 * not_app);
    return gd;
}

Eigen::Vector3d predict_tcp(const EefState& state, const EefParams& params) {
    const double tau = params.predict_horizon;
    return state.q + state.qdot * tau + 0.5 * state.qddot * tau * tau;
}

std::vector<int> top_k_set(const std::vector<ObjectBelief>& objects,
                           const Eigen::Vector3d& q_pred, const Eigen::Vector3d& q,
                           const EefParams& params) {
    if (objects.empty()) throw InputError("top_k_set: no objects");

    std::vector<std::pair<double, int>> by_pred;
    by_pred.reserve(objects.size());
    for (const auto& obj : objects)
        by_pred.emplace_back((obj.centroid - q_pred).norm(), obj.id);
    std::sort(by_pred.begin(), by_pred.end());

    std::vector<int> ids;
    for (std::size_t i = 0; i < by_pred.size() && i < static_cast<std::size_t>(params.top_k); ++i)
        ids.push_back(by_pred[i].second);

    // The object currently nearest the TCP is always a member.
    double best_d = 0.0;
    int best_id = -1;
    for (const auto& obj : objects) {
        const double d = (obj.centroid - q).norm();
        if (best_id < 0 || d < best_d || (d == best_d && obj.id < best_id)) {
            best_d = d;
            best_id = obj.id;
        }
    }
    if (std::find(ids.begin(), ids.end(), best_id) == ids.end()) ids.push_back(best_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

void step(std::vector<ObjectBelief>& objects, const EefState& state, const EefParams& params) {
    if (objects.empty()) return;
    const auto topk = top_k_set(objects, predict_tcp(state, params), state.q, params);
    const double v = state.qdot.norm();
    const double a = state.qddot.norm();

    for (auto& obj : objects) {
        const double d = cylinder_distance(obj.centroid, state, params);
        if (!obj.has_d_prev) {
            obj.d_prev = d; // first step: no approach credit from an undefined delta
            obj.has_d_prev = true;
        }
        const bool app = approach_indicator(d, obj.d_prev, params);
        const auto gd = growth_decay(obj, d, app, v, a, params);
        const bool in_topk = std::binary_search(topk.begin(), topk.end(), obj.id);
        const double beta = in_topk ? params.beta_topk : params.beta_other;
        const double ceiling = obj.low_evidence ? params.p_cap : params.p_max;

        const double candidate = obj.p + params.dt * (gd.growth - gd.decay);
        obj.p = std::min(std::max(candidate, obj.p - beta), ceiling);
        obj.p = std::max(obj.p, 0.0);
        obj.d_prev = d;
    }
}

DerivativeEstimate estimate_derivatives(const std::vector<double>& t,
                                        const std::vector<Eigen::Vector3d>& q) {
    const int n = static_cast<int>(t.size());
    if (n < 3 || q.size() != t.size())
        throw InputError("estimate_derivatives: need at least 3 matched samples");
    for (int i = 1; i < n; ++i)
        if (!(t[i] > t[i - 1]))
            throw InputError("estimate_derivatives: timestamps must be strictly increasing");

    DerivativeEstimate est;
    est.velocity.resize(n);
    est.acceleration.resize(n);

    // Three-point divided differences on (t0, t1, t2); derivative evaluated
    // at one of the three nodes selected by `at`.
    auto fit = [](double t0, double t1, double t2, const Eigen::Vector3d& q0,
                  const Eigen::Vector3d& q1, const Eigen::Vector3d& q2, double at,
                  Eigen::Vector3d* vel, Eigen::Vector3d* acc) {
        const double h1 = t1 - t0;
        const double h2 = t2 - t1;
        const Eigen::Vector3d dd1 = (q1 - q0) / h1;
        const Eigen::Vector3d dd2 = (q2 - q1) / h2;
        const Eigen::Vector3d dd = (dd2 - dd1) / (h1 + h2); // half the curvature
        *acc = 2.0 * dd;
        *vel = dd1 + dd * (2.0 * at - t0 - t1);
    };

    for (int i = 0; i < n; ++i) {
        const int c = std::clamp(i, 1, n - 2);
        fit(t[c - 1], t[c], t[c + 1], q[c - 1], q[c], q[c + 1], t[i],
            &est.velocity[i], &est.acceleration[i]);
    }
    return est;
}

EefTracker::EefTracker(std::vector<ObjectBelief> objects, const EefParams& params)
    : objects_(std::move(objects)), params_(params) {
    params_.validate();
}

void EefTracker::emit_trace(double t, const EefState& state) {
    if (objects_.empty()) return;
    const auto topk = top_k_set(objects_, predict_tcp(state, params_), state.q, params_);
    for (const auto& obj : objects_) {
        TraceRow row;
        row.t = t;
        row.object_id = obj.id;
        row.p = obj.p;
        row.d = cylinder_distance(obj.centroid, state, params_);
        row.approaching = obj.has_d_prev ? approach_indicator(row.d, obj.d_prev, params_)
                                         : (row.d < params_.approach_snap);
        row.in_topk = std::binary_search(topk.begin(), topk.end(), obj.id);
        trace_.push_back(row);
    }
}

void EefTracker::feed(const EefState& sample) {
    if (!has_last_) {
        // Anchor d_prev at the first computed distance; no dynamics yet.
        for (auto& obj : objects_) {
            obj.d_prev = cylinder_distance(obj.centroid, sample, params_);
            obj.has_d_prev = true;
        }
        emit_trace(sample.t, sample);
        last_ = sample;
        has_last_ = true;
        return;
    }
    if (!(sample.t > last_.t)) throw InputError("EefTracker: timestamps must increase");

    const long substeps = std::max(1l, std::lround((sample.t - last_.t) / params_.dt));
    for (long s = 0; s < substeps; ++s) step(objects_, last_, params_);

    last_ = sample;
    emit_trace(sample.t, sample);
}

int EefTracker::top_object() const {
    int best = -1;
    double best_p = -1.0;
    for (const auto& obj : objects_) {
        if (obj.p > best_p || (obj.p == best_p && best >= 0 && obj.id < best)) {
            best_p = obj.p;
            best = obj.id;
        }
    }
    return best;
}

} // namespace guider::eef
