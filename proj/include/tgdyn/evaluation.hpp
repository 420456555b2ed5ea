#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tgdyn/graph_store.hpp"
#include "tgdyn/negatives.hpp"
#include "tgdyn/scoring.hpp"

namespace tgdyn {

enum class TieHandling { mid_rank, optimistic, pessimistic };

// Rank of the positive among {positive} U negatives, then 1/rank. Ties use
// mid-rank by default: rank = 1 + |{n > pos}| + |{n == pos}| / 2, so a fully
// saturated candidate list cannot masquerade as a perfect prediction.
double reciprocal_rank(double pos_score, std::span<const double> neg_scores,
                       TieHandling ties = TieHandling::mid_rank);

// Streams the dataset split by split up to the negative set's split; for
// each positive in an evaluation batch, scores it and its fixed negatives
// against the pre-batch scorer state, observes the batch, and averages the
// reciprocal ranks. The scorer must be fresh (no observed edges).
EvalReport evaluate(Scorer& scorer, const SplitViews& splits, const NegativeSampleSet& negatives,
                    std::size_t batch_size, bool keep_per_edge_rr = false,
                    TieHandling ties = TieHandling::mid_rank);

// Ranks each positive against every other destination node (requires
// score_all support). Tractable for the heuristic scorers.
EvalReport evaluate_all(Scorer& scorer, const SplitViews& splits, Split split,
                        std::size_t batch_size, bool keep_per_edge_rr = false,
                        TieHandling ties = TieHandling::mid_rank);

// Memorization heuristics: score 1 when (src, dst) has been observed, over
// all history or within a recent time window.
class EdgeBankScorer final : public Scorer {
public:
    static EdgeBankScorer infinite() { return EdgeBankScorer(std::nullopt); }
    static EdgeBankScorer window(Timestamp window_duration) {
        if (window_duration <= 0) fail_validation("window_duration must be > 0");
        return EdgeBankScorer(window_duration);
    }

    [[nodiscard]] double score(NodeId src, NodeId dst, Timestamp t) const override;
    void observe(const EdgeBatch& batch) override;
    [[nodiscard]] std::uint64_t observed_edges() const override { return observed_; }
    [[nodiscard]] bool supports_score_all() const override { return true; }
    void score_all(NodeId src, Timestamp t, std::span<double> out) const override;

private:
    explicit EdgeBankScorer(std::optional<Timestamp> window) : window_(window) {}

    std::optional<Timestamp> window_;
    std::unordered_map<std::uint64_t, Timestamp> last_seen_;  // (src,dst) -> latest t
    std::unordered_map<NodeId, std::vector<NodeId>> out_edges_;  // for score_all
    std::uint64_t observed_ = 0;
};

EdgeBankScorer edgebank_scorer(bool infinite, Timestamp window_duration = 0);

// Per-edge score record exported by an external model. Either the positive
// score plus anonymous negative scores, or a map of candidate-id -> score.
struct ScoreRecord {
    std::uint64_t edge_index = 0;
    double pos_score = 0.0;
    std::vector<double> neg_scores;
    std::vector<std::pair<NodeId, double>> candidates;  // empty unless map form
    bool has_candidates = false;
};

struct ScoreDump {
    std::string dataset_name;
    Split split = Split::test;
    std::uint64_t num_edges = 0;
    std::uint64_t edge_checksum = 0;  // FNV-1a over the split's (src, dst, t)
    std::vector<ScoreRecord> records;
};

std::uint64_t split_checksum(DatasetView view);

ScoreDump load_score_dump(const std::string& path);
void save_score_dump(const ScoreDump& dump, const std::string& path);

// Throws when the dump does not match the declared split (count or checksum).
void validate_alignment(const ScoreDump& dump, const SplitViews& splits);

// MRR from the dump's own records (pos/neg form), no scorer involved.
EvalReport evaluate_score_dump(const ScoreDump& dump, const SplitViews& splits,
                               const std::string& metric_name, bool keep_per_edge_rr = false,
                               TieHandling ties = TieHandling::mid_rank);

struct SaturationConfig {
    std::vector<std::size_t> k_list = {50, 100, 1000};
    std::vector<std::size_t> n_list = {5000, 20000, 100000};
    double threshold = 1.0;
    double epsilon = 0.0;  // saturated when score >= threshold - epsilon
};

struct SaturationCell {
    std::size_t k = 0;
    std::size_t n = 0;
    std::uint64_t candidates_in_class = 0;
    std::uint64_t saturated = 0;

    [[nodiscard]] bool defined() const { return candidates_in_class > 0; }
    [[nodiscard]] double percent() const {
        return 100.0 * static_cast<double>(saturated) / static_cast<double>(candidates_in_class);
    }
};

// For each (K, N): among scored candidates whose node is in the top-K
// destinations of the previous N stream interactions (sliding window ending
// just before the scored edge), the share of saturated scores. Candidates
// with unknown node identity (anonymous negative scores) are skipped.
std::vector<SaturationCell> saturation_report(const ScoreDump& dump, const SplitViews& splits,
                                              const SaturationConfig& cfg);

nlohmann::json report_to_json(const EvalReport& report);

}  // namespace tgdyn
