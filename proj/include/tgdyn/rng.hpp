#pragma once

#include <cstdint>
#include <vector>

#include "tgdyn/error.hpp"

namespace tgdyn {

// SplitMix64: tiny counter-mixing generator (Vigna). Chosen over the standard
// library engines because its output is pinned by the algorithm itself, so
// persisted sample sets stay byte-identical across compilers and platforms.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1).
    double next_unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Unbiased uniform integer in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        // Rejection from the top of the range keeps the draw exactly uniform.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % n;
    }
};

// Derives an independent per-record stream from (seed, index) so that work
// items can be processed in any order (or in parallel) with identical output.
inline SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mixer(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    std::uint64_t s = mixer.next();
    return SplitMix64(s);
}

// Walker/Vose alias table for O(1) categorical sampling.
class AliasTable {
public:
    AliasTable() = default;

    // weights need not be normalized; entries must be >= 0 and finite, and at
    // least one must be positive.
    explicit AliasTable(const std::vector<double>& weights) {
        build(weights);
    }

    void build(const std::vector<double>& weights) {
        const std::size_t n = weights.size();
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) fail_validation("alias table: weights must be non-negative and finite");
            total += w;
        }
        if (n == 0 || total <= 0.0) fail_validation("alias table: total weight must be positive");

        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        std::vector<std::uint32_t> small;
        std::vector<std::uint32_t> large;
        small.reserve(n);
        large.reserve(n);

        const double scale = static_cast<double>(n) / total;
        for (std::size_t i = 0; i < n; ++i) {
            prob_[i] = weights[i] * scale;
            if (prob_[i] < 1.0) small.push_back(static_cast<std::uint32_t>(i));
            else                large.push_back(static_cast<std::uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            const std::uint32_t s = small.back(); small.pop_back();
            const std::uint32_t l = large.back(); large.pop_back();
            alias_[s] = l;
            prob_[l] = (prob_[l] + prob_[s]) - 1.0;
            if (prob_[l] < 1.0) small.push_back(l);
            else                large.push_back(l);
        }
        while (!large.empty()) { prob_[large.back()] = 1.0; large.pop_back(); }
        while (!small.empty()) { prob_[small.back()] = 1.0; small.pop_back(); }
    }

    [[nodiscard]] bool empty() const noexcept { return prob_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return prob_.size(); }

    std::uint32_t sample(SplitMix64& rng) const {
        const auto j = static_cast<std::uint32_t>(rng.next_below(prob_.size()));
        return rng.next_unit() < prob_[j] ? j : alias_[j];
    }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

}  // namespace tgdyn
