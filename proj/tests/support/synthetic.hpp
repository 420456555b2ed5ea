#pragma once

// Deterministic synthetic stream generators for tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include "tgdyn/graph_store.hpp"
#include "tgdyn/rng.hpp"

namespace synth {

// Uniform random edges with strictly increasing timestamps (t = position).
inline tgdyn::TemporalDataset random_stream(std::uint64_t seed, std::size_t num_edges,
                                            std::uint32_t num_nodes,
                                            const std::string& name = "synthetic") {
    tgdyn::SplitMix64 rng(seed);
    std::vector<tgdyn::EdgeEvent> edges;
    edges.reserve(num_edges);
    for (std::size_t i = 0; i < num_edges; ++i) {
        tgdyn::EdgeEvent e;
        e.src = static_cast<tgdyn::NodeId>(rng.next_below(num_nodes));
        e.dst = static_cast<tgdyn::NodeId>(rng.next_below(num_nodes));
        e.t = static_cast<tgdyn::Timestamp>(i);
        edges.push_back(e);
    }
    return tgdyn::TemporalDataset(std::move(edges), name, num_nodes);
}

// Same, but with duplicated timestamps (several edges share each tick).
inline tgdyn::TemporalDataset random_stream_grouped_t(std::uint64_t seed, std::size_t num_edges,
                                                      std::uint32_t num_nodes,
                                                      std::size_t edges_per_tick,
                                                      const std::string& name = "synthetic") {
    tgdyn::SplitMix64 rng(seed);
    std::vector<tgdyn::EdgeEvent> edges;
    edges.reserve(num_edges);
    for (std::size_t i = 0; i < num_edges; ++i) {
        tgdyn::EdgeEvent e;
        e.src = static_cast<tgdyn::NodeId>(rng.next_below(num_nodes));
        e.dst = static_cast<tgdyn::NodeId>(rng.next_below(num_nodes));
        e.t = static_cast<tgdyn::Timestamp>(i / edges_per_tick);
        edges.push_back(e);
    }
    return tgdyn::TemporalDataset(std::move(edges), name, num_nodes);
}

// Zipf(s) sampler over ranks 0..support-1 via inverse-CDF lookup.
class ZipfSampler {
public:
    ZipfSampler(std::uint32_t support, double exponent) : cdf_(support) {
        double total = 0.0;
        for (std::uint32_t r = 0; r < support; ++r) {
            total += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
            cdf_[r] = total;
        }
        for (double& c : cdf_) c /= total;
    }

    std::uint32_t sample(tgdyn::SplitMix64& rng) const {
        const double u = rng.next_unit();
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<std::uint32_t>(it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

// Destination popularity follows a fixed Zipf law; when rotate_per_window is
// nonzero, the id assignment of the popular ranks shifts by that many ids at
// every window boundary, displacing the popular mass.
inline tgdyn::TemporalDataset zipf_stream(std::uint64_t seed, std::size_t num_edges,
                                          std::uint32_t num_nodes, double exponent,
                                          std::size_t window_len, std::uint32_t rotate_per_window,
                                          const std::string& name = "zipf") {
    tgdyn::SplitMix64 rng(seed);
    const ZipfSampler zipf(num_nodes, exponent);
    std::vector<tgdyn::EdgeEvent> edges;
    edges.reserve(num_edges);
    for (std::size_t i = 0; i < num_edges; ++i) {
        const std::uint64_t window = i / window_len;
        const std::uint32_t rank = zipf.sample(rng);
        tgdyn::EdgeEvent e;
        e.src = static_cast<tgdyn::NodeId>(rng.next_below(num_nodes));
        e.dst = static_cast<tgdyn::NodeId>(
            (rank + window * std::uint64_t{rotate_per_window}) % num_nodes);
        e.t = static_cast<tgdyn::Timestamp>(i);
        edges.push_back(e);
    }
    return tgdyn::TemporalDataset(std::move(edges), name, num_nodes);
}

}  // namespace synth
