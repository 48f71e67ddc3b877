#include "noneguard/defense/separation.hpp"

#include <algorithm>
#include <cmath>

#include "noneguard/error.hpp"

namespace noneguard::defense {

double linearity_score(std::span<const double> values) {
    if (values.empty()) throw InputError("linearity score of an empty vector");
    const auto nonneg = std::count_if(values.begin(), values.end(), [](double v) { return v >= 0.0; });
    return static_cast<double>(nonneg) / static_cast<double>(values.size());
}

Moments moments(std::span<const double> values) {
    if (values.empty()) return {};
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

Separation jenks_break(std::span<const double> values) {
    if (values.size() < 2) throw InputError("jenks separation needs at least two values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    Separation sep;
    if (sorted.front() == sorted.back()) {
        sep.degenerate = true;
        sep.break_value = sorted.front();
        return sep;
    }

    // Running mean / sum of squared deviations from both ends (Welford) so every candidate
    // split gets its population variances in O(1) without cancellation.
    std::vector<double> mean_l(n + 1, 0.0), ss_l(n + 1, 0.0), mean_r(n + 1, 0.0), ss_r(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = sorted[i] - mean_l[i];
        mean_l[i + 1] = mean_l[i] + d / static_cast<double>(i + 1);
        ss_l[i + 1] = ss_l[i] + d * (sorted[i] - mean_l[i + 1]);
    }
    for (std::size_t k = 0; k < n; ++k) {  // mean_r[k]: the last k values
        const double x = sorted[n - 1 - k];
        const double d = x - mean_r[k];
        mean_r[k + 1] = mean_r[k] + d / static_cast<double>(k + 1);
        ss_r[k + 1] = ss_r[k] + d * (x - mean_r[k + 1]);
    }

    double best_ratio = 0.0, best_within = 0.0, best_between = 0.0;
    std::size_t best = n;  // number of values in B
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(sorted[i] < sorted[i + 1])) continue;
        const std::size_t nb = i + 1, no = n - nb;
        const double vb = ss_l[nb] / static_cast<double>(nb);
        const double vo = ss_r[no] / static_cast<double>(no);
        const double within = vb + vo;
        const double gap = mean_l[nb] - mean_r[no];
        const double between = gap * gap;
        const double ratio = within / between;  // squared sigma_within / sigma_between
        if (best == n || ratio <= best_ratio) {
            best_ratio = ratio;
            best = nb;
            best_within = within;
            best_between = between;
        }
    }

    sep.lower.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(best));
    sep.upper.assign(sorted.begin() + static_cast<std::ptrdiff_t>(best), sorted.end());
    sep.break_value = sorted[best - 1];
    sep.quality = std::clamp(best_between / (best_between + best_within), 0.0, 1.0);
    return sep;
}

}  // namespace noneguard::defense
