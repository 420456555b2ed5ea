#include "tgdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "tgdyn/parallel.hpp"

namespace tgdyn {

namespace {
constexpr double kMassTolerance = 1e-9;

void check_normalized(const WindowPmf& p) {
    double total = 0.0;
    for (double m : p.mass) total += m;
    if (std::abs(total - 1.0) > kMassTolerance)
        fail_validation("PMF mass does not sum to 1 within tolerance");
}
}  // namespace

const char* ground_metric_name(GroundMetric m) {
    return m == GroundMetric::index_line ? "index-line" : "discrete";
}

std::vector<WindowPmf> window_pmfs(DatasetView view, const MeasureConfig& cfg) {
    const std::size_t n = cfg.n_windows;
    if (n < 2) fail_validation("n_windows must be >= 2");
    const std::size_t per_window = view.size() / n;
    if (per_window < 1)
        fail_validation("dataset has fewer edges (" + std::to_string(view.size()) +
                        ") than windows (" + std::to_string(n) + ")");

    const auto events = view.events();
    std::vector<WindowPmf> pmfs(n);
    std::unordered_map<NodeId, std::uint64_t> hist;
    for (std::size_t w = 0; w < n; ++w) {
        hist.clear();
        const std::size_t begin = w * per_window;
        for (std::size_t i = begin; i < begin + per_window; ++i) ++hist[events[i].dst];

        WindowPmf& pmf = pmfs[w];
        pmf.window_index = w;
        pmf.support.reserve(hist.size());
        for (const auto& [id, _] : hist) pmf.support.push_back(id);
        std::sort(pmf.support.begin(), pmf.support.end());
        pmf.mass.reserve(hist.size());
        const double inv = 1.0 / static_cast<double>(per_window);
        for (NodeId id : pmf.support) pmf.mass.push_back(static_cast<double>(hist[id]) * inv);
    }
    return pmfs;
}

double wasserstein1(const WindowPmf& p, const WindowPmf& q, GroundMetric ground) {
    check_normalized(p);
    check_normalized(q);

    if (ground == GroundMetric::discrete) {
        // 0/1 ground cost: optimal transport moves exactly the surplus mass,
        // which is half the L1 distance.
        double l1 = 0.0;
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < p.support.size() || j < q.support.size()) {
            if (j >= q.support.size() || (i < p.support.size() && p.support[i] < q.support[j])) {
                l1 += p.mass[i];
                ++i;
            } else if (i >= p.support.size() || q.support[j] < p.support[i]) {
                l1 += q.mass[j];
                ++j;
            } else {
                l1 += std::abs(p.mass[i] - q.mass[j]);
                ++i;
                ++j;
            }
        }
        return 0.5 * l1;
    }

    // Index-line: W1 = integral of |F_p - F_q| over the merged support.
    double total = 0.0;
    double cdf_p = 0.0;
    double cdf_q = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    double prev_x = 0.0;
    bool have_prev = false;
    while (i < p.support.size() || j < q.support.size()) {
        NodeId x;
        if (j >= q.support.size() || (i < p.support.size() && p.support[i] <= q.support[j]))
            x = p.support[i];
        else
            x = q.support[j];
        if (have_prev) total += std::abs(cdf_p - cdf_q) * (static_cast<double>(x) - prev_x);
        while (i < p.support.size() && p.support[i] == x) cdf_p += p.mass[i++];
        while (j < q.support.size() && q.support[j] == x) cdf_q += q.mass[j++];
        prev_x = static_cast<double>(x);
        have_prev = true;
    }
    return total;
}

ShortMeasure w_short_from_pmfs(const std::vector<WindowPmf>& pmfs, GroundMetric ground,
                               unsigned threads) {
    if (pmfs.size() < 2) fail_validation("w_short needs at least 2 windows");
    ShortMeasure m;
    m.series.assign(pmfs.size() - 1, 0.0);
    parallel_for(m.series.size(), threads, [&](std::size_t i) {
        m.series[i] = wasserstein1(pmfs[i], pmfs[i + 1], ground);
    });
    double sum = 0.0;
    for (double d : m.series) sum += d;
    m.value = sum / static_cast<double>(m.series.size());
    return m;
}

LongMeasure w_long_from_pmfs(const std::vector<WindowPmf>& pmfs, GroundMetric ground,
                             unsigned threads) {
    const std::size_t n = pmfs.size();
    if (n < 2) fail_validation("w_long needs at least 2 windows");
    LongMeasure m;
    m.matrix.assign(n, std::vector<double>(n, 0.0));

    // Unordered pairs, flattened so the work parallelizes evenly.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::uint32_t i = 1; i < n; ++i)
        for (std::uint32_t j = 0; j < i; ++j) pairs.emplace_back(i, j);

    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        const double d = wasserstein1(pmfs[i], pmfs[j], ground);
        m.matrix[i][j] = d;
        m.matrix[j][i] = d;
    });

    // Fixed accumulation order keeps the scalar bit-stable across thread counts.
    double sum = 0.0;
    for (const auto& [i, j] : pairs) sum += m.matrix[i][j];
    m.value = sum / static_cast<double>(pairs.size());
    return m;
}

ShortMeasure w_short(DatasetView view, const MeasureConfig& cfg, unsigned threads) {
    return w_short_from_pmfs(window_pmfs(view, cfg), cfg.ground_metric, threads);
}

LongMeasure w_long(DatasetView view, const MeasureConfig& cfg, unsigned threads) {
    return w_long_from_pmfs(window_pmfs(view, cfg), cfg.ground_metric, threads);
}

}  // namespace tgdyn
