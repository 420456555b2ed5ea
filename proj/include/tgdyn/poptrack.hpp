#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tgdyn/graph_store.hpp"
#include "tgdyn/scoring.hpp"

namespace tgdyn {

// Time-decayed occurrence counter over destination nodes. Consuming a batch
// adds 1 per destination occurrence and then multiplies every entry by
// lambda, so after B batches an occurrence from batch b carries weight
// lambda^(B - b).
//
// Decay is applied lazily through a running scale factor: raw entries hold
// counts divided by the scale, and count(d) = raw[d] * scale. This keeps a
// batch update at O(batch) instead of O(num_nodes).
class PopularityState {
public:
    PopularityState() = default;
    PopularityState(std::uint64_t num_nodes, double lambda, std::uint64_t batch_size);

    void consume_batch(const EdgeBatch& batch);

    // Raw decayed counter, no normalization (ranking-equivalent anyway).
    [[nodiscard]] double count(NodeId dst) const;

    // Ids ranked by count descending, ties broken by ascending id; at most
    // min(k, num_nodes) entries.
    [[nodiscard]] std::vector<NodeId> predict_topk(std::size_t k) const;

    // Materializes count() for every node into out (size num_nodes).
    void dense_counts(std::span<double> out) const;

    [[nodiscard]] std::uint64_t num_nodes() const noexcept { return raw_.size(); }
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] std::uint64_t batch_size() const noexcept { return batch_size_; }
    [[nodiscard]] std::uint64_t batches_consumed() const noexcept { return batches_consumed_; }

    // Scaled internals: count(d) == raw_counts()[d] * scale(). Exposed so
    // ranking consumers can work on raw values without materializing.
    [[nodiscard]] const std::vector<double>& raw_counts() const noexcept { return raw_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }

private:
    friend PopularityState load_state(const std::string& path);

    void renormalize();

    std::vector<double> raw_;
    double scale_ = 1.0;
    double inv_scale_ = 1.0;
    double lambda_ = 1.0;
    std::uint64_t batch_size_ = 0;
    std::uint64_t batches_consumed_ = 0;
};

inline PopularityState init_state(std::uint64_t num_nodes, double lambda,
                                  std::uint64_t batch_size) {
    return PopularityState(num_nodes, lambda, batch_size);
}

// Text snapshot: header (num_nodes, lambda, batch_index) plus one counter per
// line. Round-trips exactly.
void save_state(const PopularityState& state, const std::string& path);
PopularityState load_state(const std::string& path);

// Adapts PopularityState to the Scorer contract. Scores ignore the source
// node: predictions are global at a given point in the stream.
class PopTrackScorer final : public Scorer {
public:
    PopTrackScorer(std::uint64_t num_nodes, double lambda, std::uint64_t batch_size)
        : state_(num_nodes, lambda, batch_size) {}

    [[nodiscard]] double score(NodeId, NodeId dst, Timestamp) const override {
        return state_.count(dst);
    }
    void observe(const EdgeBatch& batch) override {
        state_.consume_batch(batch);
        observed_ += batch.events.size();
    }
    [[nodiscard]] std::uint64_t observed_edges() const override { return observed_; }
    [[nodiscard]] bool supports_score_all() const override { return true; }
    void score_all(NodeId, Timestamp, std::span<double> out) const override {
        state_.dense_counts(out);
    }

    [[nodiscard]] const PopularityState& state() const noexcept { return state_; }

private:
    PopularityState state_;
    std::uint64_t observed_ = 0;
};

// Replays the stream split by split (each split batched independently from
// its first edge) up to and including stop_after, invoking on_batch with the
// pre-batch state before the batch is consumed. This single loop defines the
// state evolution used by scoring and by negative-list generation.
template <typename Fn>
void replay_poptrack(const SplitViews& splits, Split stop_after, double lambda,
                     std::size_t batch_size, Fn&& on_batch) {
    PopularityState state(splits.num_nodes(), lambda, batch_size);
    const Split order[3] = {Split::train, Split::val, Split::test};
    for (Split s : order) {
        const DatasetView& view = select_split(splits, s);
        for (const EdgeBatch& batch : batch_iter(view, batch_size)) {
            on_batch(s, batch, static_cast<const PopularityState&>(state));
            state.consume_batch(batch);
        }
        if (s == stop_after) break;
    }
}

struct NegativeSampleSet;  // negatives.hpp

// Streams the dataset through the eval split named by the negative set,
// scoring each positive against its fixed negative list with the pre-batch
// state. Fully deterministic.
EvalReport run_and_score(const SplitViews& splits, double lambda, std::size_t batch_size,
                         const NegativeSampleSet& negatives, bool keep_per_edge_rr = false);

struct GridSearchResult {
    double best_lambda = 0.0;
    std::vector<std::pair<double, double>> table;  // (lambda, validation MRR)
};

// Best lambda by validation MRR; ties broken towards the smaller lambda.
GridSearchResult grid_search_lambda(const SplitViews& splits, const std::vector<double>& grid,
                                    std::size_t batch_size, const NegativeSampleSet& negatives);

}  // namespace tgdyn
