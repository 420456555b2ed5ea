#include "tgdyn/poptrack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "tgdyn/evaluation.hpp"
#include "tgdyn/negatives.hpp"

namespace tgdyn {

namespace {
// Below this scale the raw entries are renormalized so increments (1/scale)
// stay far from overflow.
constexpr double kRenormThreshold = 1e-150;
}  // namespace

PopularityState::PopularityState(std::uint64_t num_nodes, double lambda,
                                 std::uint64_t batch_size) {
    if (!(lambda > 0.0 && lambda <= 1.0))
        fail_validation("lambda must be in (0, 1]");
    if (num_nodes < 1) fail_validation("num_nodes must be >= 1");
    raw_.assign(num_nodes, 0.0);
    lambda_ = lambda;
    batch_size_ = batch_size;
}

void PopularityState::renormalize() {
    for (double& v : raw_) v *= scale_;
    scale_ = 1.0;
    inv_scale_ = 1.0;
}

void PopularityState::consume_batch(const EdgeBatch& batch) {
    for (const EdgeEvent& e : batch.events) {
        if (e.dst >= raw_.size())
            fail_data("destination id " + std::to_string(e.dst) + " out of range");
        raw_[e.dst] += inv_scale_;
    }
    scale_ *= lambda_;
    inv_scale_ = 1.0 / scale_;
    ++batches_consumed_;
    if (scale_ < kRenormThreshold) renormalize();
}

double PopularityState::count(NodeId dst) const {
    if (dst >= raw_.size())
        fail_data("destination id " + std::to_string(dst) + " out of range");
    return raw_[dst] * scale_;
}

void PopularityState::dense_counts(std::span<double> out) const {
    if (out.size() != raw_.size()) fail_validation("dense_counts: output size mismatch");
    for (std::size_t i = 0; i < raw_.size(); ++i) out[i] = raw_[i] * scale_;
}

std::vector<NodeId> PopularityState::predict_topk(std::size_t k) const {
    if (k < 1) fail_validation("k must be >= 1");
    const std::size_t n = raw_.size();
    std::vector<NodeId> ids(n);
    std::iota(ids.begin(), ids.end(), NodeId{0});
    // Strict total order: count descending, then id ascending. The scale is a
    // positive constant, so ranking raw values ranks the true counts.
    auto before = [this](NodeId a, NodeId b) {
        if (raw_[a] != raw_[b]) return raw_[a] > raw_[b];
        return a < b;
    };
    const std::size_t take = std::min(k, n);
    if (take < n) {
        std::nth_element(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take) - 1,
                         ids.end(), before);
        ids.resize(take);
    }
    std::sort(ids.begin(), ids.end(), before);
    return ids;
}

void save_state(const PopularityState& state, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_data("cannot open output file: " + path);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", state.lambda());
    out << "tgdyn-state v1\n"
        << "num_nodes=" << state.num_nodes() << " lambda=" << buf
        << " batch_index=" << state.batches_consumed() << '\n';
    for (std::uint64_t i = 0; i < state.num_nodes(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g\n", state.count(static_cast<NodeId>(i)));
        out << buf;
    }
    if (!out) fail_data("failed writing state snapshot: " + path);
}

PopularityState load_state(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_data("cannot open state snapshot: " + path);
    std::string magic;
    if (!std::getline(in, magic) || magic != "tgdyn-state v1")
        fail_data("unrecognized state snapshot header: " + path);
    std::string header;
    if (!std::getline(in, header)) fail_data("truncated state snapshot: " + path);
    unsigned long long num_nodes = 0;
    unsigned long long batch_index = 0;
    double lambda = 0.0;
    if (std::sscanf(header.c_str(), "num_nodes=%llu lambda=%lg batch_index=%llu", &num_nodes,
                    &lambda, &batch_index) != 3)
        fail_data("malformed state snapshot header: " + path);

    PopularityState state(num_nodes, lambda, 0);
    std::string line;
    std::uint64_t i = 0;
    std::vector<double> values(num_nodes, 0.0);
    while (i < num_nodes && std::getline(in, line)) {
        values[i] = std::strtod(line.c_str(), nullptr);
        ++i;
    }
    if (i != num_nodes) fail_data("truncated state snapshot: " + path);

    // Snapshots store materialized counts, so the restored scale is 1.
    state.raw_ = std::move(values);
    state.scale_ = 1.0;
    state.inv_scale_ = 1.0;
    state.batches_consumed_ = batch_index;
    return state;
}

EvalReport run_and_score(const SplitViews& splits, double lambda, std::size_t batch_size,
                         const NegativeSampleSet& negatives, bool keep_per_edge_rr) {
    PopTrackScorer scorer(splits.num_nodes(), lambda, batch_size);
    return evaluate(scorer, splits, negatives, batch_size, keep_per_edge_rr);
}

GridSearchResult grid_search_lambda(const SplitViews& splits, const std::vector<double>& grid,
                                    std::size_t batch_size,
                                    const NegativeSampleSet& negatives) {
    if (grid.empty()) fail_validation("lambda grid must be non-empty");
    if (negatives.split != Split::val)
        fail_validation("grid search expects a validation-split negative set");
    GridSearchResult result;
    result.table.reserve(grid.size());
    double best_mrr = -1.0;
    for (double lambda : grid) {
        const EvalReport report = run_and_score(splits, lambda, batch_size, negatives);
        result.table.emplace_back(lambda, report.value);
        const bool better = report.value > best_mrr ||
                            (report.value == best_mrr && lambda < result.best_lambda);
        if (better) {
            best_mrr = report.value;
            result.best_lambda = lambda;
        }
    }
    return result;
}

}  // namespace tgdyn
