#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "guider/errors.hpp"

namespace guider::metrics {

/// Remaining Time at Confident Prediction. The prediction is treated as
/// piecewise constant from each sample until the next (or until contact_t for
/// the last sample). Returns contact_t - t* where t* starts the earliest run
/// of correct samples lasting at least `hold` seconds; nullopt when no run
/// qualifies. Throws InputError when contact_t precedes the first sample.
std::optional<double> rtcp(const std::vector<double>& t, const std::vector<std::uint8_t>& correct,
                           double contact_t, double hold = 0.5);

/// Percentage of [first-correct-instant, contact_t] during which the
/// prediction is correct (no hold requirement). 0 when never correct.
double stability_percent(const std::vector<double>& t, const std::vector<std::uint8_t>& correct,
                         double contact_t);

struct Aggregate {
    double median = 0.0;
    double mad = 0.0; // median absolute deviation around the median, unscaled
};
Aggregate aggregate(std::vector<double> values);

enum class TailDirection { Greater, Less };

struct WilcoxonResult {
    double p_two = 1.0;
    double p_one = 1.0;
    double r_bs = 0.0; // matched-pairs rank-biserial correlation
    int n_used = 0;    // pairs remaining after dropping zero differences
    double w_plus = 0.0;
    double w_minus = 0.0;
};

/// Exact paired Wilcoxon signed-rank test. Zero differences are dropped;
/// ties get average ranks; the null distribution is enumerated exactly over
/// all 2^n sign assignments (n <= 20). The one-tailed p follows the
/// pre-registered direction (Greater: first of pair hypothesized larger).
/// All differences zero degenerates to p = 1, r_bs = 0.
WilcoxonResult wilcoxon_exact(const std::vector<std::pair<double, double>>& pairs,
                              TailDirection direction = TailDirection::Greater);

} // namespace guider::metrics
