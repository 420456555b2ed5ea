#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tgdyn/graph_store.hpp"

namespace tgdyn {

// Streaming scoring contract shared by PopTrack, the EdgeBank heuristics and
// any other model plugged into the evaluation harness. Scoring must be
// read-only; observe() is the only state transition, so scores for a batch
// reflect exactly the edges of earlier batches.
class Scorer {
public:
    virtual ~Scorer() = default;

    [[nodiscard]] virtual double score(NodeId src, NodeId dst, Timestamp t) const = 0;

    virtual void observe(const EdgeBatch& batch) = 0;

    [[nodiscard]] virtual std::uint64_t observed_edges() const = 0;

    // Dense scores for every destination node, for rank-against-all
    // evaluation. Optional; the default says no.
    [[nodiscard]] virtual bool supports_score_all() const { return false; }
    virtual void score_all(NodeId /*src*/, Timestamp /*t*/, std::span<double> /*out*/) const;
};

struct EvalReport {
    std::string metric_name;
    double value = 0.0;  // mean reciprocal rank, in (0, 1]
    std::vector<double> per_edge_rr;

    struct Counters {
        std::uint64_t num_edges = 0;
        std::uint64_t num_candidates_total = 0;
        std::uint64_t tie_events = 0;
    } counters;
};

}  // namespace tgdyn
