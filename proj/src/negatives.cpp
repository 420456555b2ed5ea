#include "tgdyn/negatives.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_set>

#include "tgdyn/io_util.hpp"
#include "tgdyn/parallel.hpp"

namespace tgdyn {

namespace {
constexpr int kCollisionRetries = 8;
constexpr int kRandomRetries = 64;

inline std::uint64_t pack_pair(NodeId src, NodeId dst) {
    return (std::uint64_t{src} << 32) | std::uint64_t{dst};
}
}  // namespace

std::vector<double> popularity_weights(const PopularityState& state, double exponent) {
    if (!(exponent > 0.0)) fail_validation("popularity exponent must be > 0");
    const std::uint64_t n = state.num_nodes();
    std::vector<double> weights(n, 0.0);
    double total = 0.0;
    for (std::uint64_t d = 0; d < n; ++d) {
        const double c = state.count(static_cast<NodeId>(d));
        if (c > 0.0) {
            weights[d] = std::pow(c, exponent);
            total += weights[d];
        }
    }
    if (total > 0.0) {
        const double inv = 1.0 / total;
        for (double& w : weights) w *= inv;
    }
    return weights;
}

RpnsSampler::RpnsSampler(const PopularityState& state, const RpnsConfig& cfg)
    : cfg_(cfg), rng_(cfg.seed) {
    if (!(cfg.popular_fraction >= 0.0 && cfg.popular_fraction <= 1.0))
        fail_validation("popular_fraction must be in [0, 1]");
    if (!(cfg.popularity_exponent > 0.0))
        fail_validation("popularity exponent must be > 0");
    if (state.num_nodes() < 2)
        fail_validation("RP-NS needs at least 2 nodes");
    num_nodes_ = state.num_nodes();
    refresh(state);
}

void RpnsSampler::refresh(const PopularityState& state) {
    if (state.num_nodes() != num_nodes_)
        fail_validation("RP-NS refresh with a different node count");
    popular_ids_.clear();
    std::vector<double> weights;
    const auto& raw = state.raw_counts();
    for (std::uint64_t d = 0; d < num_nodes_; ++d) {
        if (raw[d] > 0.0) {
            popular_ids_.push_back(static_cast<NodeId>(d));
            // The common scale cancels under normalization; pow on raw values
            // keeps the table exact even when the scale is extreme.
            weights.push_back(std::pow(raw[d], cfg_.popularity_exponent));
        }
    }
    if (popular_ids_.empty()) {
        popular_table_ = AliasTable();  // degenerate: popular branch falls back to uniform
    } else {
        popular_table_.build(weights);
    }
}

NodeId RpnsSampler::sample_one(NodeId positive_dst) {
    for (int attempt = 0; attempt < kCollisionRetries; ++attempt) {
        const bool popular = rng_.next_unit() < cfg_.popular_fraction;
        NodeId d;
        if (popular && !popular_table_.empty()) {
            d = popular_ids_[popular_table_.sample(rng_)];
        } else {
            d = static_cast<NodeId>(rng_.next_below(num_nodes_));
        }
        if (d != positive_dst) return d;
    }
    // Persistent collisions: draw uniformly from the other num_nodes-1 ids.
    const auto d = static_cast<NodeId>(rng_.next_below(num_nodes_ - 1));
    return d >= positive_dst ? d + 1 : d;
}

std::vector<NodeId> RpnsSampler::sample(NodeId positive_dst) {
    std::vector<NodeId> out(cfg_.negatives_per_positive);
    for (NodeId& d : out) d = sample_one(positive_dst);
    return out;
}

const char* scheme_name(NegativeSampleSet::Scheme s) {
    switch (s) {
        case NegativeSampleSet::Scheme::naive: return "naive";
        case NegativeSampleSet::Scheme::topn: return "topn";
        case NegativeSampleSet::Scheme::blend: return "blend";
    }
    return "?";
}

NegativeSampleSet::Scheme scheme_from_name(const std::string& name) {
    if (name == "naive") return NegativeSampleSet::Scheme::naive;
    if (name == "topn") return NegativeSampleSet::Scheme::topn;
    if (name == "blend") return NegativeSampleSet::Scheme::blend;
    fail_validation("unknown negative-sampling scheme: " + name);
}

std::string NegativeSampleSet::metric_name() const {
    switch (scheme) {
        case Scheme::naive: return "MRR_naive";
        case Scheme::topn: return "MRR_top" + std::to_string(params.value("n", 0));
        case Scheme::blend: return "MRR_blend";
    }
    return "MRR";
}

namespace {

// Distinct train destinations per source, stored as one sorted array of
// packed (src, dst) pairs; lookups are equal_range slices.
class HistoryIndex {
public:
    explicit HistoryIndex(DatasetView train) {
        pairs_.reserve(train.size());
        for (const EdgeEvent& e : train.events()) pairs_.push_back(pack_pair(e.src, e.dst));
        std::sort(pairs_.begin(), pairs_.end());
        pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
    }

    // Destinations previously seen with src, ascending.
    [[nodiscard]] std::span<const std::uint64_t> of(NodeId src) const {
        const auto lo = std::lower_bound(pairs_.begin(), pairs_.end(), pack_pair(src, 0));
        const auto hi = src == std::numeric_limits<NodeId>::max()
                            ? pairs_.end()
                            : std::lower_bound(lo, pairs_.end(), pack_pair(src + 1, 0));
        return {lo != pairs_.end() ? &*lo : nullptr, static_cast<std::size_t>(hi - lo)};
    }

private:
    std::vector<std::uint64_t> pairs_;
};

// Edges of the whole dataset that share one timestamp, exposed as a packed
// (src, dst) membership set. Negative candidates must not collide with any
// positive at the scored edge's timestamp.
struct TimestampGroup {
    std::size_t begin = 0;  // eval-split index range covered by this timestamp
    std::size_t end = 0;
    std::unordered_set<std::uint64_t> positives;
};

std::vector<TimestampGroup> timestamp_groups(const SplitViews& splits, DatasetView eval_view) {
    const auto& all = splits.base().edges();
    const auto events = eval_view.events();
    std::vector<TimestampGroup> groups;
    std::size_t i = 0;
    while (i < events.size()) {
        const Timestamp t = events[i].t;
        std::size_t j = i;
        while (j < events.size() && events[j].t == t) ++j;
        TimestampGroup g;
        g.begin = i;
        g.end = j;
        // All positives in the dataset at time t, not just those in the split.
        const auto lo = std::lower_bound(all.begin(), all.end(), t,
                                         [](const EdgeEvent& e, Timestamp v) { return e.t < v; });
        const auto hi = std::upper_bound(all.begin(), all.end(), t,
                                         [](Timestamp v, const EdgeEvent& e) { return v < e.t; });
        g.positives.reserve(static_cast<std::size_t>(hi - lo));
        for (auto it = lo; it != hi; ++it) g.positives.insert(pack_pair(it->src, it->dst));
        groups.push_back(std::move(g));
        i = j;
    }
    return groups;
}

void stamp_identity(NegativeSampleSet& set, const SplitViews& splits, Split split) {
    const DatasetView& view = select_split(splits, split);
    set.dataset_name = splits.base().name();
    set.split = split;
    set.num_edges = view.size();
    set.first_t = view.events().front().t;
    set.last_t = view.events().back().t;
}

// Uniform draw over [0, num_nodes) avoiding `excluded` and anything already
// in `chosen`; bounded rejection first, then a deterministic wrapping scan.
NodeId draw_random_negative(SplitMix64& rng, std::uint64_t num_nodes, NodeId positive,
                            const std::unordered_set<std::uint64_t>& t_positives, NodeId src,
                            const std::vector<NodeId>& chosen) {
    auto admissible = [&](NodeId d) {
        if (d == positive) return false;
        if (t_positives.contains(pack_pair(src, d))) return false;
        return std::find(chosen.begin(), chosen.end(), d) == chosen.end();
    };
    NodeId d = 0;
    for (int attempt = 0; attempt < kRandomRetries; ++attempt) {
        d = static_cast<NodeId>(rng.next_below(num_nodes));
        if (admissible(d)) return d;
    }
    for (std::uint64_t step = 1; step <= num_nodes; ++step) {
        const auto c = static_cast<NodeId>((std::uint64_t{d} + step) % num_nodes);
        if (admissible(c)) return c;
    }
    fail_data("cannot draw a random negative: candidate space exhausted");
}

// min(k, |pool|) distinct picks via partial Fisher-Yates; pool is clobbered.
void pick_without_replacement(SplitMix64& rng, std::vector<NodeId>& pool, std::size_t k,
                              std::vector<NodeId>& out) {
    const std::size_t take = std::min(k, pool.size());
    for (std::size_t j = 0; j < take; ++j) {
        const std::size_t r = j + static_cast<std::size_t>(rng.next_below(pool.size() - j));
        std::swap(pool[j], pool[r]);
        out.push_back(pool[j]);
    }
}

}  // namespace

NegativeSampleSet gen_eval_negatives_naive(const SplitViews& splits, Split split,
                                           const NaiveNegConfig& cfg, unsigned threads) {
    if (split == Split::train) fail_validation("evaluation negatives are for val or test");
    if (cfg.q == 0) fail_validation("q must be >= 1");
    if (!(cfg.hist_fraction >= 0.0 && cfg.hist_fraction <= 1.0))
        fail_validation("hist_fraction must be in [0, 1]");
    const std::uint64_t num_nodes = splits.num_nodes();
    if (cfg.q + 1 >= num_nodes)
        fail_validation("q (" + std::to_string(cfg.q) + ") must be < num_nodes - 1");
    const DatasetView& view = select_split(splits, split);
    if (view.empty()) fail_data("evaluation split is empty");
    if (splits.train.empty()) fail_data("train split is empty");

    const HistoryIndex history(splits.train);
    const auto groups = timestamp_groups(splits, view);
    const auto n_hist_target = static_cast<std::size_t>(
        std::llround(static_cast<double>(cfg.q) * cfg.hist_fraction));

    NegativeSampleSet set;
    set.scheme = NegativeSampleSet::Scheme::naive;
    set.seed = cfg.seed;
    set.params = {{"q", cfg.q}, {"hist_fraction", cfg.hist_fraction}, {"seed", cfg.seed}};
    stamp_identity(set, splits, split);
    set.offsets.assign(view.size() + 1, 0);
    set.ids.assign(view.size() * cfg.q, 0);
    for (std::size_t i = 0; i <= view.size(); ++i) set.offsets[i] = i * cfg.q;

    const auto events = view.events();
    // Parallel over timestamp groups: every edge's draws depend only on its
    // own derived stream, so the thread partition cannot change the output.
    parallel_for(groups.size(), threads, [&](std::size_t gi) {
        const TimestampGroup& group = groups[gi];
        thread_local std::vector<NodeId> hist_pool;
        thread_local std::vector<NodeId> chosen;
        for (std::size_t i = group.begin; i < group.end; ++i) {
            const EdgeEvent& e = events[i];
            SplitMix64 rng = derive_stream(cfg.seed, i);

            hist_pool.clear();
            for (std::uint64_t packed : history.of(e.src)) {
                const auto d = static_cast<NodeId>(packed & 0xffffffffULL);
                if (d != e.dst && !group.positives.contains(pack_pair(e.src, d)))
                    hist_pool.push_back(d);
            }

            chosen.clear();
            pick_without_replacement(rng, hist_pool, n_hist_target, chosen);
            while (chosen.size() < cfg.q) {
                chosen.push_back(draw_random_negative(rng, num_nodes, e.dst, group.positives,
                                                      e.src, chosen));
            }
            std::copy(chosen.begin(), chosen.end(), set.ids.begin() + set.offsets[i]);
        }
    });
    return set;
}

NegativeSampleSet gen_eval_negatives_topn(const SplitViews& splits, Split split,
                                          const TopnNegConfig& cfg) {
    if (split == Split::train) fail_validation("evaluation negatives are for val or test");
    if (cfg.n == 0) fail_validation("n must be >= 1");
    if (cfg.n >= splits.num_nodes())
        fail_validation("n (" + std::to_string(cfg.n) + ") must be < num_nodes");
    const DatasetView& view = select_split(splits, split);
    if (view.empty()) fail_data("evaluation split is empty");

    NegativeSampleSet set;
    set.scheme = NegativeSampleSet::Scheme::topn;
    set.seed = 0;
    set.params = {{"n", cfg.n}, {"lambda", cfg.lambda}, {"batch_size", cfg.batch_size}};
    stamp_identity(set, splits, split);
    set.offsets.reserve(view.size() + 1);
    set.offsets.push_back(0);
    set.ids.reserve(view.size() * cfg.n);

    replay_poptrack(splits, split, cfg.lambda, cfg.batch_size,
                    [&](Split s, const EdgeBatch& batch, const PopularityState& state) {
                        if (s != split) return;
                        const std::vector<NodeId> top = state.predict_topk(cfg.n);
                        for (const EdgeEvent& e : batch.events) {
                            for (NodeId d : top)
                                if (d != e.dst) set.ids.push_back(d);
                            set.offsets.push_back(set.ids.size());
                        }
                    });
    return set;
}

NegativeSampleSet gen_eval_negatives_blend(const SplitViews& splits, Split split,
                                           const BlendNegConfig& cfg, unsigned threads) {
    if (split == Split::train) fail_validation("evaluation negatives are for val or test");
    if (cfg.n_top > cfg.pool) fail_validation("n_top must be <= pool");
    if (cfg.pool >= splits.num_nodes()) fail_validation("pool must be < num_nodes");
    const std::size_t total = cfg.n_top + cfg.n_hist + cfg.n_rand;
    if (total + 1 >= splits.num_nodes())
        fail_validation("n_top + n_hist + n_rand must be < num_nodes - 1");
    const DatasetView& view = select_split(splits, split);
    if (view.empty()) fail_data("evaluation split is empty");
    if (splits.train.empty()) fail_data("train split is empty");

    const HistoryIndex history(splits.train);
    const auto groups = timestamp_groups(splits, view);
    const std::uint64_t num_nodes = splits.num_nodes();

    NegativeSampleSet set;
    set.scheme = NegativeSampleSet::Scheme::blend;
    set.seed = cfg.seed;
    set.params = {{"pool", cfg.pool},   {"n_top", cfg.n_top},
                  {"n_hist", cfg.n_hist}, {"n_rand", cfg.n_rand},
                  {"lambda", cfg.lambda}, {"batch_size", cfg.batch_size},
                  {"seed", cfg.seed}};
    stamp_identity(set, splits, split);
    set.offsets.assign(view.size() + 1, 0);
    set.ids.assign(view.size() * total, 0);
    for (std::size_t i = 0; i <= view.size(); ++i) set.offsets[i] = i * total;

    // Group index per eval edge, to find the timestamp positives from inside
    // the replay callback.
    std::vector<std::uint32_t> group_of(view.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi)
        for (std::size_t i = groups[gi].begin; i < groups[gi].end; ++i)
            group_of[i] = static_cast<std::uint32_t>(gi);

    const auto events = view.events();
    replay_poptrack(
        splits, split, cfg.lambda, cfg.batch_size,
        [&](Split s, const EdgeBatch& batch, const PopularityState& state) {
            if (s != split) return;
            const std::vector<NodeId> pool_ids = state.predict_topk(cfg.pool);
            parallel_for(batch.events.size(), threads, [&](std::size_t bi) {
                const std::size_t i = batch.offset + bi;
                const EdgeEvent& e = events[i];
                const TimestampGroup& group = groups[group_of[i]];
                SplitMix64 rng = derive_stream(cfg.seed, i);

                thread_local std::vector<NodeId> scratch;
                thread_local std::vector<NodeId> chosen;
                chosen.clear();

                // Top branch: uniform without replacement from the pool.
                scratch.assign(pool_ids.begin(), pool_ids.end());
                std::erase(scratch, e.dst);
                pick_without_replacement(rng, scratch, cfg.n_top, chosen);

                // Historical branch; cross-branch duplicates are excluded up
                // front, which is the deterministic equivalent of redrawing.
                scratch.clear();
                for (std::uint64_t packed : history.of(e.src)) {
                    const auto d = static_cast<NodeId>(packed & 0xffffffffULL);
                    if (d != e.dst && !group.positives.contains(pack_pair(e.src, d)) &&
                        std::find(chosen.begin(), chosen.end(), d) == chosen.end())
                        scratch.push_back(d);
                }
                pick_without_replacement(rng, scratch, cfg.n_hist, chosen);

                // Random branch absorbs any shortfall from the first two.
                while (chosen.size() < total) {
                    chosen.push_back(draw_random_negative(rng, num_nodes, e.dst,
                                                          group.positives, e.src, chosen));
                }
                std::copy(chosen.begin(), chosen.end(), set.ids.begin() + set.offsets[i]);
            });
        });
    return set;
}

namespace {

nlohmann::json header_json(const NegativeSampleSet& set) {
    return {{"format_version", 1},
            {"scheme", scheme_name(set.scheme)},
            {"params", set.params},
            {"seed", set.seed},
            {"dataset_name", set.dataset_name},
            {"split", split_name(set.split)},
            {"num_edges", set.num_edges},
            {"first_t", set.first_t},
            {"last_t", set.last_t}};
}

void parse_header(const nlohmann::json& h, NegativeSampleSet& set) {
    if (h.value("format_version", 0) != 1)
        fail_data("unsupported negative-set format version");
    set.scheme = scheme_from_name(h.at("scheme").get<std::string>());
    set.params = h.at("params");
    set.seed = h.at("seed").get<std::uint64_t>();
    set.dataset_name = h.at("dataset_name").get<std::string>();
    set.split = split_from_name(h.at("split").get<std::string>());
    set.num_edges = h.at("num_edges").get<std::uint64_t>();
    set.first_t = h.at("first_t").get<Timestamp>();
    set.last_t = h.at("last_t").get<Timestamp>();
}

constexpr char kBinaryMagic[8] = {'T', 'G', 'N', 'B', '1', '\n', 0, 0};

template <typename T>
void append_raw(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T read_raw(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) fail_data("truncated negative-set file");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

void save_negatives(const NegativeSampleSet& set, const std::string& path, bool binary) {
    std::string out;
    const std::string header = header_json(set).dump();
    if (binary) {
        out.reserve(16 + header.size() + set.ids.size() * 4 + set.num_edges * 4);
        out.append(kBinaryMagic, sizeof kBinaryMagic);
        append_raw<std::uint32_t>(out, static_cast<std::uint32_t>(header.size()));
        out += header;
        for (std::uint64_t i = 0; i < set.num_edges; ++i) {
            const auto negs = set.negatives(i);
            append_raw<std::uint32_t>(out, static_cast<std::uint32_t>(negs.size()));
            for (NodeId d : negs) append_raw<std::uint32_t>(out, d);
        }
    } else {
        out.reserve(header.size() + set.ids.size() * 8);
        out += header;
        out += '\n';
        nlohmann::json record;
        for (std::uint64_t i = 0; i < set.num_edges; ++i) {
            const auto negs = set.negatives(i);
            record["edge_index"] = i;
            record["negatives"] = std::vector<NodeId>(negs.begin(), negs.end());
            out += record.dump();
            out += '\n';
        }
    }
    write_file_atomic(path, out);
}

NegativeSampleSet load_negatives(const std::string& path) {
    const std::string data = read_file(path);
    NegativeSampleSet set;

    if (data.size() >= sizeof kBinaryMagic &&
        std::memcmp(data.data(), kBinaryMagic, sizeof kBinaryMagic) == 0) {
        std::size_t pos = sizeof kBinaryMagic;
        const auto header_len = read_raw<std::uint32_t>(data, pos);
        if (pos + header_len > data.size()) fail_data("truncated negative-set file");
        parse_header(nlohmann::json::parse(data.substr(pos, header_len)), set);
        pos += header_len;
        set.offsets.reserve(set.num_edges + 1);
        set.offsets.push_back(0);
        for (std::uint64_t i = 0; i < set.num_edges; ++i) {
            const auto count = read_raw<std::uint32_t>(data, pos);
            for (std::uint32_t k = 0; k < count; ++k)
                set.ids.push_back(read_raw<std::uint32_t>(data, pos));
            set.offsets.push_back(set.ids.size());
        }
        return set;
    }

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
    if (!next_line(line)) fail_data("empty negative-set file: " + path);
    parse_header(nlohmann::json::parse(line), set);
    set.offsets.reserve(set.num_edges + 1);
    set.offsets.push_back(0);
    std::uint64_t index = 0;
    while (next_line(line)) {
        if (line.empty()) continue;
        const nlohmann::json record = nlohmann::json::parse(line);
        if (record.at("edge_index").get<std::uint64_t>() != index)
            fail_data("negative-set records out of order at edge " + std::to_string(index));
        for (const auto& v : record.at("negatives")) set.ids.push_back(v.get<NodeId>());
        set.offsets.push_back(set.ids.size());
        ++index;
    }
    if (index != set.num_edges)
        fail_data("negative-set record count (" + std::to_string(index) +
                  ") does not match header num_edges (" + std::to_string(set.num_edges) + ")");
    return set;
}

void validate_alignment(const NegativeSampleSet& set, const SplitViews& splits) {
    const DatasetView& view = select_split(splits, set.split);
    if (set.dataset_name != splits.base().name())
        fail_data("split mismatch: negative set was generated for dataset '" +
                  set.dataset_name + "', got '" + splits.base().name() + "'");
    if (set.num_edges != view.size())
        fail_data("split mismatch: negative set has " + std::to_string(set.num_edges) +
                  " edges, split has " + std::to_string(view.size()));
    if (view.empty()) fail_data("split mismatch: empty evaluation split");
    if (set.first_t != view.events().front().t || set.last_t != view.events().back().t)
        fail_data("split mismatch: timestamp range differs from the negative set header");
    if (set.offsets.size() != set.num_edges + 1)
        fail_data("negative set is internally inconsistent");
}

}  // namespace tgdyn
