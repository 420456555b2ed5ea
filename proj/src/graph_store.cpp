#include "tgdyn/graph_store.hpp"

#include "tgdyn/io_util.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace tgdyn {

TemporalDataset::TemporalDataset(std::vector<EdgeEvent> edges, std::string name,
                                 std::optional<std::uint64_t> num_nodes_override)
    : edges_(std::move(edges)), name_(std::move(name)) {
    std::stable_sort(edges_.begin(), edges_.end(),
                     [](const EdgeEvent& a, const EdgeEvent& b) { return a.t < b.t; });
    std::uint64_t max_id_plus_1 = 0;
    for (const EdgeEvent& e : edges_) {
        max_id_plus_1 = std::max<std::uint64_t>(max_id_plus_1, std::uint64_t{e.src} + 1);
        max_id_plus_1 = std::max<std::uint64_t>(max_id_plus_1, std::uint64_t{e.dst} + 1);
    }
    if (num_nodes_override) {
        if (*num_nodes_override < max_id_plus_1)
            fail_validation("num_nodes override is smaller than max node id + 1");
        num_nodes_ = *num_nodes_override;
    } else {
        num_nodes_ = max_id_plus_1;
    }
}

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "val") return Split::val;
    if (name == "test") return Split::test;
    fail_validation("unknown split name: " + name);
}

const DatasetView& select_split(const SplitViews& views, Split s) {
    switch (s) {
        case Split::train: return views.train;
        case Split::val: return views.val;
        case Split::test: return views.test;
    }
    fail_validation("bad split selector");
}

BatchRange::BatchRange(DatasetView view, std::size_t batch_size)
    : view_(view), batch_size_(batch_size) {
    if (batch_size == 0) fail_validation("batch_size must be >= 1");
}

EdgeBatch BatchRange::iterator::operator*() const {
    const std::size_t end = std::min(pos_ + range_->batch_size_, range_->view_.size());
    return EdgeBatch{pos_, range_->view_.events().subspan(pos_, end - pos_)};
}

namespace {

struct FieldView {
    const char* begin;
    const char* end;
};

// Splits a line on the delimiter. Returns false if fewer than `needed` fields.
bool split_fields(const std::string& line, char delim, int needed,
                  std::vector<FieldView>& out) {
    out.clear();
    const char* p = line.data();
    const char* line_end = p + line.size();
    while (true) {
        const char* q = p;
        while (q != line_end && *q != delim) ++q;
        out.push_back(FieldView{p, q});
        if (q == line_end) break;
        p = q + 1;
    }
    return static_cast<int>(out.size()) >= needed;
}

FieldView trimmed(FieldView f) {
    while (f.begin != f.end && std::isspace(static_cast<unsigned char>(*f.begin))) ++f.begin;
    while (f.end != f.begin && std::isspace(static_cast<unsigned char>(*(f.end - 1)))) --f.end;
    return f;
}

bool parse_u64(FieldView f, std::uint64_t& out) {
    f = trimmed(f);
    if (f.begin == f.end) return false;
    auto [ptr, ec] = std::from_chars(f.begin, f.end, out);
    return ec == std::errc() && ptr == f.end;
}

bool parse_i64(FieldView f, std::int64_t& out) {
    f = trimmed(f);
    if (f.begin == f.end) return false;
    auto [ptr, ec] = std::from_chars(f.begin, f.end, out);
    return ec == std::errc() && ptr == f.end;
}

bool parse_fixed_point(FieldView f, int decimals, std::int64_t& out) {
    f = trimmed(f);
    if (f.begin == f.end) return false;
    std::string buf(f.begin, f.end);
    char* endp = nullptr;
    const double v = std::strtod(buf.c_str(), &endp);
    if (endp != buf.c_str() + buf.size() || !std::isfinite(v)) return false;
    out = std::llround(v * std::pow(10.0, decimals));
    return true;
}

}  // namespace

LoadResult load_edge_list(const std::string& path, const FormatConfig& format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_data("cannot open edge-list file: " + path);

    for (int c : format.columns) {
        if (c < 0) fail_validation("column positions must be non-negative");
    }

    std::vector<EdgeEvent> edges;
    std::vector<IdMapEntry> id_map;
    std::unordered_map<std::uint64_t, NodeId> remap;

    auto resolve_id = [&](std::uint64_t raw, std::int64_t row) -> NodeId {
        if (format.remap_ids) {
            auto [it, inserted] = remap.emplace(raw, static_cast<NodeId>(remap.size()));
            if (inserted) id_map.push_back(IdMapEntry{raw, it->second});
            return it->second;
        }
        if (raw > std::numeric_limits<NodeId>::max())
            fail_data("node id " + std::to_string(raw) + " exceeds the dense id range; "
                      "re-run with id remapping enabled", row);
        return static_cast<NodeId>(raw);
    };

    const int needed = 1 + std::max({format.columns[0], format.columns[1], format.columns[2]});
    std::vector<FieldView> fields;
    std::string line;
    std::int64_t row = 0;
    bool skipped_header = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (format.has_header && !skipped_header) {
            skipped_header = true;
            continue;
        }
        if (line.empty()) continue;
        if (!split_fields(line, format.delimiter, needed, fields))
            fail_data("malformed record: expected at least " + std::to_string(needed) +
                      " fields", row);

        std::uint64_t src_raw = 0;
        std::uint64_t dst_raw = 0;
        if (!parse_u64(fields[format.columns[0]], src_raw))
            fail_data("malformed record: non-numeric src field", row);
        if (!parse_u64(fields[format.columns[1]], dst_raw))
            fail_data("malformed record: non-numeric dst field", row);

        Timestamp t = 0;
        const FieldView tf = fields[format.columns[2]];
        const bool t_ok = format.time_decimals ? parse_fixed_point(tf, *format.time_decimals, t)
                                               : parse_i64(tf, t);
        if (!t_ok) fail_data("malformed record: non-numeric timestamp field", row);
        if (t < 0) fail_data("malformed record: negative timestamp", row);

        EdgeEvent e;
        e.src = resolve_id(src_raw, row);
        e.dst = resolve_id(dst_raw, row);
        e.t = t;
        edges.push_back(e);
    }

    if (edges.empty()) fail_data("empty dataset: " + path);

    std::string name = format.dataset_name.empty()
                           ? std::filesystem::path(path).stem().string()
                           : format.dataset_name;
    LoadResult result;
    result.dataset = TemporalDataset(std::move(edges), std::move(name), format.num_nodes_override);
    result.id_map = std::move(id_map);
    return result;
}

void write_edge_list(const TemporalDataset& ds, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail_data("cannot open output file: " + tmp);
        char buf[80];
        for (const EdgeEvent& e : ds.edges()) {
            const int n = std::snprintf(buf, sizeof buf, "%u,%u,%lld\n", e.src, e.dst,
                                        static_cast<long long>(e.t));
            out.write(buf, n);
        }
        if (!out) fail_data("failed writing edge list: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail_data("failed renaming " + tmp + ": " + ec.message());
}

void write_id_map(const std::vector<IdMapEntry>& map, const std::string& path) {
    std::string out;
    for (const IdMapEntry& e : map) {
        out += std::to_string(e.original);
        out += ',';
        out += std::to_string(e.dense);
        out += '\n';
    }
    write_file_atomic(path, out);
}

SplitViews chronological_split(const TemporalDataset& ds, const SplitSpec& spec) {
    const std::size_t n = ds.num_edges();
    std::size_t train_end = 0;
    std::size_t val_end = 0;

    if (spec.mode == SplitSpec::Mode::ratio) {
        if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) ||
            !(spec.val_fraction > 0.0 && spec.val_fraction < 1.0) ||
            !(spec.train_fraction + spec.val_fraction < 1.0))
            fail_validation("ratio split requires train, val in (0,1) with train + val < 1");
        train_end = static_cast<std::size_t>(spec.train_fraction * static_cast<double>(n));
        val_end = train_end + static_cast<std::size_t>(spec.val_fraction * static_cast<double>(n));
    } else {
        if (spec.train_end_t > spec.val_end_t)
            fail_validation("boundary split requires train_end_t <= val_end_t");
        const auto& edges = ds.edges();
        auto past = [&](Timestamp b) {
            return static_cast<std::size_t>(
                std::upper_bound(edges.begin(), edges.end(), b,
                                 [](Timestamp t, const EdgeEvent& e) { return t < e.t; }) -
                edges.begin());
        };
        train_end = past(spec.train_end_t);
        val_end = past(spec.val_end_t);
    }

    if (train_end == 0 || val_end == train_end || val_end == n)
        fail_data("empty split segment (train " + std::to_string(train_end) + ", val " +
                  std::to_string(val_end - train_end) + ", test " + std::to_string(n - val_end) +
                  ")");

    SplitViews views;
    views.train = DatasetView(ds, 0, train_end);
    views.val = DatasetView(ds, train_end, val_end);
    views.test = DatasetView(ds, val_end, n);
    return views;
}

namespace {

Stats stats_over(std::span<const EdgeEvent> events, std::uint64_t num_nodes) {
    Stats s;
    s.num_edges = events.size();
    s.num_nodes = num_nodes;
    if (events.empty()) return s;
    std::unordered_set<NodeId> dst;
    dst.reserve(events.size());
    for (const EdgeEvent& e : events) dst.insert(e.dst);
    s.num_distinct_dst = dst.size();
    s.t_min = events.front().t;  // sorted by construction
    s.t_max = events.back().t;
    return s;
}

}  // namespace

Stats dataset_stats(const TemporalDataset& ds) {
    return stats_over(ds.edges(), ds.num_nodes());
}

Stats dataset_stats(DatasetView view) {
    return stats_over(view.events(), view.num_nodes());
}

}  // namespace tgdyn
