#pragma once

#include <cstdint>
#include <vector>

#include "tgdyn/graph_store.hpp"

namespace tgdyn {

// Empirical destination-frequency distribution of one stream window.
struct WindowPmf {
    std::size_t window_index = 0;
    std::vector<NodeId> support;  // strictly increasing
    std::vector<double> mass;     // parallel to support, positive, sums to 1
};

// Ground metric for the Wasserstein-1 distance between node PMFs.
//   index_line: nodes sit at their integer ids on the real line (the usual
//               1-D earth mover distance).
//   discrete:   0/1 ground cost; W1 degenerates to total variation. Invariant
//               under node-id permutation, unlike index_line.
enum class GroundMetric { index_line, discrete };

[[nodiscard]] const char* ground_metric_name(GroundMetric m);

struct MeasureConfig {
    std::size_t n_windows = 100;
    GroundMetric ground_metric = GroundMetric::index_line;
};

// Splits the stream into exactly n_windows consecutive windows of
// floor(num_edges / n) edges each (the remainder is dropped) and returns the
// normalized destination histogram of each.
std::vector<WindowPmf> window_pmfs(DatasetView view, const MeasureConfig& cfg);

double wasserstein1(const WindowPmf& p, const WindowPmf& q, GroundMetric ground);

struct ShortMeasure {
    double value = 0.0;            // mean of the step series
    std::vector<double> series;    // n_windows - 1 consecutive-window distances
};

struct LongMeasure {
    double value = 0.0;                        // mean over unordered window pairs
    std::vector<std::vector<double>> matrix;   // symmetric, zero diagonal
};

ShortMeasure w_short(DatasetView view, const MeasureConfig& cfg, unsigned threads = 1);
LongMeasure w_long(DatasetView view, const MeasureConfig& cfg, unsigned threads = 1);

// Same measures computed from already-built PMFs.
ShortMeasure w_short_from_pmfs(const std::vector<WindowPmf>& pmfs, GroundMetric ground,
                               unsigned threads = 1);
LongMeasure w_long_from_pmfs(const std::vector<WindowPmf>& pmfs, GroundMetric ground,
                             unsigned threads = 1);

}  // namespace tgdyn
