#include "tgdyn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

#include "tgdyn/io_util.hpp"

namespace tgdyn {

void Scorer::score_all(NodeId, Timestamp, std::span<double>) const {
    fail_validation("this scorer does not support dense scoring of all nodes");
}

namespace {

struct RankBreakdown {
    std::uint64_t greater = 0;
    std::uint64_t equal = 0;  // negatives tied with the positive

    [[nodiscard]] double rank(TieHandling ties) const {
        switch (ties) {
            case TieHandling::mid_rank:
                return 1.0 + static_cast<double>(greater) + static_cast<double>(equal) / 2.0;
            case TieHandling::optimistic:
                return 1.0 + static_cast<double>(greater);
            case TieHandling::pessimistic:
                return 1.0 + static_cast<double>(greater) + static_cast<double>(equal);
        }
        return 1.0;
    }
};

RankBreakdown rank_against(double pos_score, std::span<const double> neg_scores) {
    if (!std::isfinite(pos_score)) fail_data("non-finite positive score");
    RankBreakdown r;
    for (double s : neg_scores) {
        if (!std::isfinite(s)) fail_data("non-finite negative score");
        if (s > pos_score) ++r.greater;
        else if (s == pos_score) ++r.equal;
    }
    return r;
}

inline std::uint64_t pack_pair(NodeId src, NodeId dst) {
    return (std::uint64_t{src} << 32) | std::uint64_t{dst};
}

}  // namespace

double reciprocal_rank(double pos_score, std::span<const double> neg_scores, TieHandling ties) {
    if (neg_scores.empty()) fail_validation("reciprocal_rank needs at least one negative");
    return 1.0 / rank_against(pos_score, neg_scores).rank(ties);
}

EvalReport evaluate(Scorer& scorer, const SplitViews& splits, const NegativeSampleSet& negatives,
                    std::size_t batch_size, bool keep_per_edge_rr, TieHandling ties) {
    validate_alignment(negatives, splits);
    if (scorer.observed_edges() != 0)
        fail_validation("scorer state desync: evaluation requires a fresh scorer");

    EvalReport report;
    report.metric_name = negatives.metric_name();
    if (keep_per_edge_rr) report.per_edge_rr.reserve(negatives.num_edges);

    double sum_rr = 0.0;
    std::uint64_t expected_observed = 0;
    std::vector<double> neg_buf;
    const Split order[3] = {Split::train, Split::val, Split::test};
    for (Split s : order) {
        const DatasetView& view = select_split(splits, s);
        for (const EdgeBatch& batch : batch_iter(view, batch_size)) {
            if (s == negatives.split) {
                for (std::size_t j = 0; j < batch.events.size(); ++j) {
                    const EdgeEvent& e = batch.events[j];
                    const std::size_t i = batch.offset + j;
                    const auto negs = negatives.negatives(i);

                    const double pos = scorer.score(e.src, e.dst, e.t);
                    neg_buf.clear();
                    for (NodeId d : negs) neg_buf.push_back(scorer.score(e.src, d, e.t));

                    double rr = 1.0;  // an empty list leaves the positive unopposed
                    if (!neg_buf.empty()) {
                        const RankBreakdown r = rank_against(pos, neg_buf);
                        if (r.equal > 0) ++report.counters.tie_events;
                        rr = 1.0 / r.rank(ties);
                    }
                    sum_rr += rr;
                    if (keep_per_edge_rr) report.per_edge_rr.push_back(rr);
                    ++report.counters.num_edges;
                    report.counters.num_candidates_total += 1 + negs.size();
                }
            }
            scorer.observe(batch);
            expected_observed += batch.events.size();
            if (scorer.observed_edges() != expected_observed)
                fail_data("scorer state desync: observed edge count mismatch");
        }
        if (s == negatives.split) break;
    }
    report.value = sum_rr / static_cast<double>(report.counters.num_edges);
    return report;
}

EvalReport evaluate_all(Scorer& scorer, const SplitViews& splits, Split split,
                        std::size_t batch_size, bool keep_per_edge_rr, TieHandling ties) {
    if (split == Split::train) fail_validation("evaluation runs on the val or test split");
    if (!scorer.supports_score_all())
        fail_validation("MRR_all needs a scorer with dense score support");
    if (scorer.observed_edges() != 0)
        fail_validation("scorer state desync: evaluation requires a fresh scorer");
    const DatasetView& eval_view = select_split(splits, split);
    if (eval_view.empty()) fail_data("evaluation split is empty");

    EvalReport report;
    report.metric_name = "MRR_all";
    if (keep_per_edge_rr) report.per_edge_rr.reserve(eval_view.size());

    const std::uint64_t num_nodes = splits.num_nodes();
    std::vector<double> dense(num_nodes);
    double sum_rr = 0.0;
    std::uint64_t expected_observed = 0;
    const Split order[3] = {Split::train, Split::val, Split::test};
    for (Split s : order) {
        const DatasetView& view = select_split(splits, s);
        for (const EdgeBatch& batch : batch_iter(view, batch_size)) {
            if (s == split) {
                for (const EdgeEvent& e : batch.events) {
                    scorer.score_all(e.src, e.t, dense);
                    const double pos = dense[e.dst];
                    if (!std::isfinite(pos)) fail_data("non-finite positive score");
                    RankBreakdown r;
                    for (double v : dense) {
                        if (!std::isfinite(v)) fail_data("non-finite candidate score");
                        if (v > pos) ++r.greater;
                        else if (v == pos) ++r.equal;
                    }
                    --r.equal;  // the positive's own slot
                    if (r.equal > 0) ++report.counters.tie_events;
                    const double rr = 1.0 / r.rank(ties);
                    sum_rr += rr;
                    if (keep_per_edge_rr) report.per_edge_rr.push_back(rr);
                    ++report.counters.num_edges;
                    report.counters.num_candidates_total += num_nodes;
                }
            }
            scorer.observe(batch);
            expected_observed += batch.events.size();
            if (scorer.observed_edges() != expected_observed)
                fail_data("scorer state desync: observed edge count mismatch");
        }
        if (s == split) break;
    }
    report.value = sum_rr / static_cast<double>(report.counters.num_edges);
    return report;
}

double EdgeBankScorer::score(NodeId src, NodeId dst, Timestamp t) const {
    const auto it = last_seen_.find(pack_pair(src, dst));
    if (it == last_seen_.end()) return 0.0;
    if (!window_) return 1.0;
    return it->second >= t - *window_ ? 1.0 : 0.0;
}

void EdgeBankScorer::observe(const EdgeBatch& batch) {
    for (const EdgeEvent& e : batch.events) {
        const auto [it, inserted] = last_seen_.insert_or_assign(pack_pair(e.src, e.dst), e.t);
        if (inserted) out_edges_[e.src].push_back(e.dst);
    }
    observed_ += batch.events.size();
}

void EdgeBankScorer::score_all(NodeId src, Timestamp t, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const auto it = out_edges_.find(src);
    if (it == out_edges_.end()) return;
    for (NodeId dst : it->second) out[dst] = score(src, dst, t);
}

EdgeBankScorer edgebank_scorer(bool infinite, Timestamp window_duration) {
    return infinite ? EdgeBankScorer::infinite() : EdgeBankScorer::window(window_duration);
}

std::uint64_t split_checksum(DatasetView view) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for (const EdgeEvent& e : view.events()) {
        mix(e.src);
        mix(e.dst);
        mix(static_cast<std::uint64_t>(e.t));
    }
    return h;
}

void save_score_dump(const ScoreDump& dump, const std::string& path) {
    nlohmann::json header = {{"format_version", 1},
                             {"kind", "score_dump"},
                             {"dataset_name", dump.dataset_name},
                             {"split", split_name(dump.split)},
                             {"num_edges", dump.num_edges},
                             {"edge_checksum", dump.edge_checksum}};
    std::string out = header.dump();
    out += '\n';
    for (const ScoreRecord& rec : dump.records) {
        nlohmann::json j;
        j["edge_index"] = rec.edge_index;
        if (rec.has_candidates) {
            nlohmann::json cands = nlohmann::json::object();
            for (const auto& [id, s] : rec.candidates) cands[std::to_string(id)] = s;
            j["candidates"] = std::move(cands);
        } else {
            j["pos_score"] = rec.pos_score;
            j["neg_scores"] = rec.neg_scores;
        }
        out += j.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

ScoreDump load_score_dump(const std::string& path) {
    const std::string data = read_file(path);
    ScoreDump dump;
    std::size_t pos = 0;
    auto next_line = [&](std::string& line) {
        if (pos >= data.size()) return false;
        const std::size_t nl = data.find('\n', pos);
        const std::size_t end = nl == std::string::npos ? data.size() : nl;
        line.assign(data, pos, end - pos);
        pos = end + 1;
        return true;
    };

    std::string line;
    if (!next_line(line)) fail_data("empty score dump: " + path);
    const nlohmann::json header = nlohmann::json::parse(line);
    if (header.value("format_version", 0) != 1 || header.value("kind", "") != "score_dump")
        fail_data("unrecognized score dump header: " + path);
    dump.dataset_name = header.at("dataset_name").get<std::string>();
    dump.split = split_from_name(header.at("split").get<std::string>());
    dump.num_edges = header.at("num_edges").get<std::uint64_t>();
    dump.edge_checksum = header.at("edge_checksum").get<std::uint64_t>();

    dump.records.reserve(dump.num_edges);
    while (next_line(line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        ScoreRecord rec;
        rec.edge_index = j.at("edge_index").get<std::uint64_t>();
        if (j.contains("candidates")) {
            rec.has_candidates = true;
            for (const auto& [key, value] : j.at("candidates").items())
                rec.candidates.emplace_back(static_cast<NodeId>(std::stoul(key)),
                                            value.get<double>());
            std::sort(rec.candidates.begin(), rec.candidates.end());
        } else {
            rec.pos_score = j.at("pos_score").get<double>();
            rec.neg_scores = j.at("neg_scores").get<std::vector<double>>();
        }
        dump.records.push_back(std::move(rec));
    }
    if (dump.records.size() != dump.num_edges)
        fail_data("score dump record count does not match its header");
    for (std::size_t i = 0; i < dump.records.size(); ++i)
        if (dump.records[i].edge_index != i)
            fail_data("score dump records out of order at " + std::to_string(i));
    return dump;
}

void validate_alignment(const ScoreDump& dump, const SplitViews& splits) {
    const DatasetView& view = select_split(splits, dump.split);
    if (dump.dataset_name != splits.base().name())
        fail_data("score dump mismatch: dump was made for dataset '" + dump.dataset_name +
                  "', got '" + splits.base().name() + "'");
    if (dump.num_edges != view.size())
        fail_data("score dump mismatch: dump has " + std::to_string(dump.num_edges) +
                  " edges, split has " + std::to_string(view.size()));
    if (dump.edge_checksum != split_checksum(view))
        fail_data("score dump mismatch: edge checksum differs from the split");
}

EvalReport evaluate_score_dump(const ScoreDump& dump, const SplitViews& splits,
                               const std::string& metric_name, bool keep_per_edge_rr,
                               TieHandling ties) {
    validate_alignment(dump, splits);
    const DatasetView& view = select_split(splits, dump.split);
    EvalReport report;
    report.metric_name = metric_name;
    double sum_rr = 0.0;
    std::vector<double> neg_buf;
    for (std::size_t i = 0; i < dump.records.size(); ++i) {
        const ScoreRecord& rec = dump.records[i];
        double pos = rec.pos_score;
        neg_buf.clear();
        if (rec.has_candidates) {
            const NodeId dst = view[i].dst;
            bool found = false;
            for (const auto& [id, s] : rec.candidates) {
                if (id == dst) {
                    pos = s;
                    found = true;
                } else {
                    neg_buf.push_back(s);
                }
            }
            if (!found)
                fail_data("score dump record " + std::to_string(i) +
                          " does not score the positive destination");
        } else {
            neg_buf = rec.neg_scores;
        }
        double rr = 1.0;
        if (!neg_buf.empty()) {
            const RankBreakdown r = rank_against(pos, neg_buf);
            if (r.equal > 0) ++report.counters.tie_events;
            rr = 1.0 / r.rank(ties);
        }
        sum_rr += rr;
        if (keep_per_edge_rr) report.per_edge_rr.push_back(rr);
        ++report.counters.num_edges;
        report.counters.num_candidates_total += 1 + neg_buf.size();
    }
    if (report.counters.num_edges == 0) fail_data("score dump has no records");
    report.value = sum_rr / static_cast<double>(report.counters.num_edges);
    return report;
}

namespace {

// #nodes whose window count lies in [1, m], over count values [1, max_count].
class CountFenwick {
public:
    explicit CountFenwick(std::size_t max_count) : tree_(max_count + 1, 0) {}

    void add(std::size_t count, std::int64_t delta) {
        for (std::size_t i = count; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
    }

    [[nodiscard]] std::uint64_t prefix(std::size_t count) const {
        std::int64_t s = 0;
        for (std::size_t i = std::min(count, tree_.size() - 1); i > 0; i -= i & (~i + 1))
            s += tree_[i];
        return static_cast<std::uint64_t>(s);
    }

private:
    std::vector<std::int64_t> tree_;
};

// Exact sliding-window top-K membership with (count desc, id asc) ordering.
class TopKWindow {
public:
    TopKWindow(std::uint64_t num_nodes, std::size_t window)
        : cnt_(num_nodes, 0), fenwick_(window) {}

    void add(NodeId d) {
        const std::uint32_t old = cnt_[d]++;
        if (old > 0) {
            fenwick_.add(old, -1);
            buckets_[old].erase(d);
        } else {
            ++active_;
        }
        fenwick_.add(old + 1, +1);
        buckets_[old + 1].insert(d);
    }

    void remove(NodeId d) {
        const std::uint32_t old = cnt_[d]--;
        fenwick_.add(old, -1);
        buckets_[old].erase(d);
        if (old > 1) {
            fenwick_.add(old - 1, +1);
            buckets_[old - 1].insert(d);
        } else {
            --active_;
        }
    }

    // Is d among the top-k most frequent destinations of the current window?
    [[nodiscard]] bool in_top(NodeId d, std::size_t k) const {
        const std::uint32_t m = cnt_[d];
        if (m == 0) return false;
        const std::uint64_t above = active_ - fenwick_.prefix(m);
        if (above >= k) return false;
        std::uint64_t slots = k - above;
        const auto it = buckets_.find(m);
        for (NodeId id : it->second) {  // ascending id: ties go to smaller ids
            if (id == d) return true;
            if (--slots == 0) return false;
        }
        return false;
    }

private:
    std::vector<std::uint32_t> cnt_;
    CountFenwick fenwick_;
    std::unordered_map<std::uint32_t, std::set<NodeId>> buckets_;
    std::uint64_t active_ = 0;
};

}  // namespace

std::vector<SaturationCell> saturation_report(const ScoreDump& dump, const SplitViews& splits,
                                              const SaturationConfig& cfg) {
    validate_alignment(dump, splits);
    for (std::size_t k : cfg.k_list)
        for (std::size_t n : cfg.n_list)
            if (k > n) fail_validation("saturation requires K <= N for every pair used");

    const DatasetView& view = select_split(splits, dump.split);
    const auto& all = splits.base().edges();
    const std::size_t split_offset = view.offset();
    const double cutoff = cfg.threshold - cfg.epsilon;

    std::vector<SaturationCell> cells;
    cells.reserve(cfg.k_list.size() * cfg.n_list.size());
    for (std::size_t k : cfg.k_list)
        for (std::size_t n : cfg.n_list) cells.push_back(SaturationCell{k, n, 0, 0});

    // One pass per window length; all K values share the window state.
    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
        const std::size_t n = cfg.n_list[ni];
        TopKWindow window(splits.num_nodes(), n);
        std::size_t lo = 0;
        std::size_t hi = 0;

        for (const ScoreRecord& rec : dump.records) {
            const std::size_t g = split_offset + rec.edge_index;
            const std::size_t target_lo = g > n ? g - n : 0;
            while (hi < g) window.add(all[hi++].dst);
            while (lo < target_lo) window.remove(all[lo++].dst);

            auto tally = [&](NodeId id, double score) {
                for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
                    if (!window.in_top(id, cfg.k_list[ki])) continue;
                    SaturationCell& cell = cells[ki * cfg.n_list.size() + ni];
                    ++cell.candidates_in_class;
                    if (score >= cutoff) ++cell.saturated;
                }
            };

            if (rec.has_candidates) {
                for (const auto& [id, s] : rec.candidates) tally(id, s);
            } else {
                // Anonymous negative scores carry no node identity; only the
                // positive can be classified.
                tally(view[rec.edge_index].dst, rec.pos_score);
            }
        }
    }
    return cells;
}

nlohmann::json report_to_json(const EvalReport& report) {
    return {{"metric", report.metric_name},
            {"value", report.value},
            {"num_edges", report.counters.num_edges},
            {"num_candidates_total", report.counters.num_candidates_total},
            {"tie_events", report.counters.tie_events}};
}

}  // namespace tgdyn
