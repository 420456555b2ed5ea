#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tgdyn/error.hpp"

namespace tgdyn {

using NodeId = std::uint32_t;
using Timestamp = std::int64_t;

// One directed interaction (src -> dst) at time t. Timestamp unit is
// dataset-defined; ordering is all that matters downstream.
struct EdgeEvent {
    NodeId src = 0;
    NodeId dst = 0;
    Timestamp t = 0;

    friend bool operator==(const EdgeEvent&, const EdgeEvent&) = default;
};

// Immutable after construction; safe to share across threads.
class TemporalDataset {
public:
    TemporalDataset() = default;

    // Stable-sorts edges by timestamp, preserving input order within equal
    // timestamps. num_nodes defaults to max id + 1.
    TemporalDataset(std::vector<EdgeEvent> edges, std::string name,
                    std::optional<std::uint64_t> num_nodes_override = std::nullopt);

    [[nodiscard]] const std::vector<EdgeEvent>& edges() const noexcept { return edges_; }
    [[nodiscard]] std::uint64_t num_nodes() const noexcept { return num_nodes_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] std::size_t num_edges() const noexcept { return edges_.size(); }

private:
    std::vector<EdgeEvent> edges_;
    std::uint64_t num_nodes_ = 0;
    std::string name_;
};

// Contiguous chronological slice of a dataset. Cheap to copy; does not own.
class DatasetView {
public:
    DatasetView() = default;
    DatasetView(const TemporalDataset& base, std::size_t begin, std::size_t end)
        : base_(&base), begin_(begin), end_(end) {}

    static DatasetView whole(const TemporalDataset& base) {
        return DatasetView(base, 0, base.num_edges());
    }

    [[nodiscard]] std::span<const EdgeEvent> events() const {
        return std::span<const EdgeEvent>(base_->edges()).subspan(begin_, end_ - begin_);
    }
    [[nodiscard]] std::size_t size() const noexcept { return end_ - begin_; }
    [[nodiscard]] bool empty() const noexcept { return begin_ == end_; }
    [[nodiscard]] std::size_t offset() const noexcept { return begin_; }
    [[nodiscard]] const TemporalDataset& base() const noexcept { return *base_; }
    [[nodiscard]] std::uint64_t num_nodes() const noexcept { return base_ ? base_->num_nodes() : 0; }
    [[nodiscard]] const EdgeEvent& operator[](std::size_t i) const { return base_->edges()[begin_ + i]; }

private:
    const TemporalDataset* base_ = nullptr;
    std::size_t begin_ = 0;
    std::size_t end_ = 0;
};

struct SplitSpec {
    enum class Mode { ratio, boundary };
    Mode mode = Mode::ratio;

    // ratio mode
    double train_fraction = 0.70;
    double val_fraction = 0.15;

    // boundary mode: t <= train_end_t -> train, t <= val_end_t -> val, else test
    Timestamp train_end_t = 0;
    Timestamp val_end_t = 0;
};

struct SplitViews {
    DatasetView train;
    DatasetView val;
    DatasetView test;

    [[nodiscard]] const TemporalDataset& base() const { return train.base(); }
    [[nodiscard]] std::uint64_t num_nodes() const { return train.num_nodes(); }
};

enum class Split { train, val, test };

[[nodiscard]] const char* split_name(Split s);
[[nodiscard]] Split split_from_name(const std::string& name);
[[nodiscard]] const DatasetView& select_split(const SplitViews& views, Split s);

struct EdgeBatch {
    std::size_t offset = 0;  // index of the first edge within the split
    std::span<const EdgeEvent> events;
};

// Deterministic positional batching; the last batch may be short.
class BatchRange {
public:
    BatchRange(DatasetView view, std::size_t batch_size);

    class iterator {
    public:
        iterator(const BatchRange* range, std::size_t pos) : range_(range), pos_(pos) {}
        EdgeBatch operator*() const;
        iterator& operator++() { pos_ += range_->batch_size_; return *this; }
        bool operator!=(const iterator& other) const { return pos_ < other.pos_; }

    private:
        const BatchRange* range_;
        std::size_t pos_;
    };

    [[nodiscard]] iterator begin() const { return iterator(this, 0); }
    [[nodiscard]] iterator end() const { return iterator(this, view_.size()); }
    [[nodiscard]] std::size_t num_batches() const {
        return (view_.size() + batch_size_ - 1) / batch_size_;
    }

private:
    friend class iterator;
    DatasetView view_;
    std::size_t batch_size_;
};

inline BatchRange batch_iter(DatasetView view, std::size_t batch_size) {
    return BatchRange(view, batch_size);
}

struct FormatConfig {
    char delimiter = ',';
    bool has_header = false;
    // Positions of the src, dst and t columns within each record.
    std::array<int, 3> columns = {0, 1, 2};
    // When set, timestamps are parsed as decimal reals and stored fixed-point
    // with this many fractional digits.
    std::optional<int> time_decimals;
    std::optional<std::uint64_t> num_nodes_override;
    // Compact sparse ids into 0..n-1 (first-appearance order) and report the map.
    bool remap_ids = false;
    std::string dataset_name;  // defaults to the file stem
};

struct IdMapEntry {
    std::uint64_t original = 0;
    NodeId dense = 0;
};

struct LoadResult {
    TemporalDataset dataset;
    std::vector<IdMapEntry> id_map;  // empty unless remap_ids was requested
};

LoadResult load_edge_list(const std::string& path, const FormatConfig& format = {});

// Canonical form: "src,dst,t" per line, no header, LF line endings. Loading a
// canonical file with the default FormatConfig reproduces it byte for byte.
void write_edge_list(const TemporalDataset& ds, const std::string& path);

void write_id_map(const std::vector<IdMapEntry>& map, const std::string& path);

SplitViews chronological_split(const TemporalDataset& ds, const SplitSpec& spec);

struct Stats {
    std::uint64_t num_edges = 0;
    std::uint64_t num_nodes = 0;
    std::uint64_t num_distinct_dst = 0;
    std::optional<Timestamp> t_min;
    std::optional<Timestamp> t_max;
};

Stats dataset_stats(const TemporalDataset& ds);
Stats dataset_stats(DatasetView view);

}  // namespace tgdyn
