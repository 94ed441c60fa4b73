#include "guider/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace guider::metrics {

namespace {

void check_timeline(const std::vector<double>& t, const std::vector<std::uint8_t>& correct,
                    double contact_t) {
    if (t.empty() || t.size() != correct.size())
        throw InputError("metrics: empty or mismatched timeline");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw InputError("metrics: timestamps must increase");
    if (contact_t < t.front())
        throw InputError("metrics: contact before timeline start");
}

/// End of the prediction segment opened at sample i.
double segment_end(const std::vector<double>& t, std::size_t i, double contact_t) {
    return (i + 1 < t.size()) ? std::min(t[i + 1], contact_t) : contact_t;
}

} // namespace

std::optional<double> rtcp(const std::vector<double>& t, const std::vector<std::uint8_t>& correct,
                           double contact_t, double hold) {
    check_timeline(t, correct, contact_t);

    std::size_t i = 0;
    while (i < t.size() && t[i] <= contact_t) {
        if (!correct[i]) {
            ++i;
            continue;
        }
        const double run_start = t[i];
        std::size_t j = i;
        while (j + 1 < t.size() && correct[j + 1] && t[j + 1] <= contact_t) ++j;
        const double run_end = segment_end(t, j, contact_t);
        if (run_end - run_start >= hold) return contact_t - run_start;
        i = j + 1;
    }
    return std::nullopt;
}

double stability_percent(const std::vector<double>& t, const std::vector<std::uint8_t>& correct,
                         double contact_t) {
    check_timeline(t, correct, contact_t);

    double first_correct = -1.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (correct[i] && t[i] <= contact_t) {
            first_correct = t[i];
            break;
        }
    }
    if (first_correct < 0.0) return 0.0;
    const double window = contact_t - first_correct;
    if (window <= 0.0) return 100.0; // correct exactly at contact

    double correct_time = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!correct[i] || t[i] > contact_t) continue;
        const double begin = std::max(t[i], first_correct);
        const double end = segment_end(t, i, contact_t);
        if (end > begin) correct_time += end - begin;
    }
    return 100.0 * correct_time / window;
}

Aggregate aggregate(std::vector<double> values) {
    if (values.empty()) throw InputError("aggregate: no values");
    auto median_of = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    Aggregate out;
    out.median = median_of(values);
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - out.median);
    out.mad = median_of(dev);
    return out;
}

WilcoxonResult wilcoxon_exact(const std::vector<std::pair<double, double>>& pairs,
                              TailDirection direction) {
    std::vector<double> diffs;
    for (const auto& [a, b] : pairs) {
        const double d = a - b;
        if (d != 0.0) diffs.push_back(d);
    }

    WilcoxonResult res;
    res.n_used = static_cast<int>(diffs.size());
    if (diffs.empty()) return res; // degenerate: p = 1, r_bs = 0

    const int n = res.n_used;
    if (n > 20) throw InputError("wilcoxon_exact: more than 20 nonzero differences");

    // Ranks of |d| with average ranks for ties, doubled so they stay integral.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(diffs[a]) < std::abs(diffs[b]);
    });
    std::vector<long> rank2(n, 0);
    for (int i = 0; i < n;) {
        int j = i;
        while (j + 1 < n && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
        const long sum2 = static_cast<long>(i + 1 + j + 1); // doubled average rank
        for (int k = i; k <= j; ++k) rank2[order[k]] = sum2;
        i = j + 1;
    }

    long w2_plus = 0, w2_minus = 0;
    for (int i = 0; i < n; ++i) {
        if (diffs[i] > 0.0) w2_plus += rank2[i];
        else w2_minus += rank2[i];
    }
    res.w_plus = w2_plus / 2.0;
    res.w_minus = w2_minus / 2.0;
    res.r_bs = static_cast<double>(w2_plus - w2_minus) / static_cast<double>(w2_plus + w2_minus);

    // Exact null distribution of the doubled W+ via subset-sum counting.
    const long s2 = w2_plus + w2_minus; // n(n+1), invariant under midranking
    std::vector<std::uint64_t> counts(s2 + 1, 0);
    counts[0] = 1;
    for (int i = 0; i < n; ++i) {
        for (long w = s2; w >= rank2[i]; --w) counts[w] += counts[w - rank2[i]];
    }
    const double total = std::ldexp(1.0, n); // 2^n

    auto prob_ge = [&](long w) {
        std::uint64_t c = 0;
        for (long v = std::max(0l, w); v <= s2; ++v) c += counts[v];
        return static_cast<double>(c) / total;
    };
    auto prob_le = [&](long w) {
        std::uint64_t c = 0;
        for (long v = 0; v <= std::min(w, s2); ++v) c += counts[v];
        return static_cast<double>(c) / total;
    };

    res.p_one = (direction == TailDirection::Greater) ? prob_ge(w2_plus) : prob_le(w2_plus);
    const long a = std::min(w2_plus, w2_minus);
    res.p_two = std::min(1.0, prob_le(a) + prob_ge(s2 - a));
    return res;
}

} // namespace guider::metrics
