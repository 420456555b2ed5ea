#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgdyn/graph_store.hpp"
#include "tgdyn/poptrack.hpp"
#include "tgdyn/rng.hpp"

namespace tgdyn {

// Training-time negative sampler: each draw comes from the recent-popularity
// distribution counts^exponent with probability popular_fraction, otherwise
// uniform over all nodes. Draws colliding with the positive destination are
// rejected and redrawn.
struct RpnsConfig {
    double popularity_exponent = 0.75;
    double popular_fraction = 0.9;
    std::size_t negatives_per_positive = 1;
    std::uint64_t seed = 0;
};

// Normalized counts^exponent over all nodes; zero-count nodes carry zero mass.
std::vector<double> popularity_weights(const PopularityState& state, double exponent);

class RpnsSampler {
public:
    RpnsSampler(const PopularityState& state, const RpnsConfig& cfg);

    // Rebuilds the popularity table from a newer state snapshot; the RNG
    // stream continues where it left off.
    void refresh(const PopularityState& state);

    // negatives_per_positive independent draws, none equal to positive_dst.
    // Duplicates within the list are possible by design.
    std::vector<NodeId> sample(NodeId positive_dst);

    NodeId sample_one(NodeId positive_dst);

private:
    RpnsConfig cfg_;
    std::uint64_t num_nodes_ = 0;
    std::vector<NodeId> popular_ids_;  // nodes with positive weight
    AliasTable popular_table_;         // empty when all counts are zero
    SplitMix64 rng_;
};

// Fixed, persisted per-positive negative lists for one evaluation split.
struct NegativeSampleSet {
    enum class Scheme { naive, topn, blend };

    Scheme scheme = Scheme::naive;
    nlohmann::json params;  // scheme parameters, kept verbatim in the header
    std::uint64_t seed = 0;

    // Split identity, used to validate alignment before evaluation.
    std::string dataset_name;
    Split split = Split::val;
    std::uint64_t num_edges = 0;
    Timestamp first_t = 0;
    Timestamp last_t = 0;

    // Flattened per-edge lists.
    std::vector<std::uint64_t> offsets;  // num_edges + 1 entries
    std::vector<NodeId> ids;

    [[nodiscard]] std::span<const NodeId> negatives(std::size_t edge_index) const {
        return std::span<const NodeId>(ids).subspan(
            offsets[edge_index], offsets[edge_index + 1] - offsets[edge_index]);
    }
    [[nodiscard]] std::string metric_name() const;
};

[[nodiscard]] const char* scheme_name(NegativeSampleSet::Scheme s);
[[nodiscard]] NegativeSampleSet::Scheme scheme_from_name(const std::string& name);

struct NaiveNegConfig {
    std::size_t q = 20;             // negatives per positive
    double hist_fraction = 0.5;     // share drawn from same-source train history
    std::uint64_t seed = 0;
};

struct TopnNegConfig {
    std::size_t n = 20;
    double lambda = 0.96;
    std::size_t batch_size = 200;
};

struct BlendNegConfig {
    std::size_t pool = 1000;  // popularity pool the top draws come from
    std::size_t n_top = 20;
    std::size_t n_hist = 5;
    std::size_t n_rand = 5;
    double lambda = 0.96;
    std::size_t batch_size = 200;
    std::uint64_t seed = 0;
};

NegativeSampleSet gen_eval_negatives_naive(const SplitViews& splits, Split split,
                                           const NaiveNegConfig& cfg, unsigned threads = 1);

// Deterministic, seed-free: per positive, the top-n nodes of the pre-batch
// popularity state, with the positive removed if present.
NegativeSampleSet gen_eval_negatives_topn(const SplitViews& splits, Split split,
                                          const TopnNegConfig& cfg);

NegativeSampleSet gen_eval_negatives_blend(const SplitViews& splits, Split split,
                                           const BlendNegConfig& cfg, unsigned threads = 1);

// Text mode is JSON-lines (header record, then one record per positive);
// binary mode packs the id lists for the large top-N sets. Both round-trip
// byte-exactly for identical inputs.
void save_negatives(const NegativeSampleSet& set, const std::string& path,
                    bool binary = false);
NegativeSampleSet load_negatives(const std::string& path);

// Header/split alignment check; throws SplitMismatch-style data errors.
void validate_alignment(const NegativeSampleSet& set, const SplitViews& splits);

}  // namespace tgdyn
