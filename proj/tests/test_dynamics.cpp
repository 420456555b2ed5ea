#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "tgdyn/dynamics.hpp"

using namespace tgdyn;
using oracle::IntPmf;

namespace {

WindowPmf delta(NodeId id) {
    WindowPmf p;
    p.support = {id};
    p.mass = {1.0};
    return p;
}

IntPmf random_int_pmf(SplitMix64& rng, std::size_t max_points, std::uint32_t id_range) {
    const std::size_t points = 1 + rng.next_below(max_points);
    IntPmf p;
    std::vector<bool> used(id_range, false);
    while (p.support.size() < points) {
        const auto id = static_cast<std::uint32_t>(rng.next_below(id_range));
        if (!used[id]) {
            used[id] = true;
            p.support.push_back(id);
        }
    }
    std::sort(p.support.begin(), p.support.end());
    for (std::size_t i = 0; i < points; ++i)
        p.weight.push_back(1 + static_cast<std::int64_t>(rng.next_below(10)));
    return p;
}

// Rescales q's integer weights so both PMFs share a denominator.
void align_totals(IntPmf& p, IntPmf& q) {
    const std::int64_t tp = p.total();
    const std::int64_t tq = q.total();
    for (auto& w : p.weight) w *= tq;
    for (auto& w : q.weight) w *= tp;
}

}  // namespace

TEST_CASE("window_pmfs") {
    SUBCASE("two windows of three edges") {
        std::vector<EdgeEvent> edges;
        const NodeId dsts[6] = {1, 1, 2, 3, 3, 3};
        for (int i = 0; i < 6; ++i) edges.push_back({0, dsts[i], static_cast<Timestamp>(i)});
        const TemporalDataset ds(std::move(edges), "w");
        const auto pmfs = window_pmfs(DatasetView::whole(ds), {.n_windows = 2});
        REQUIRE(pmfs.size() == 2);
        CHECK(pmfs[0].support == std::vector<NodeId>{1, 2});
        CHECK(pmfs[0].mass[0] == doctest::Approx(2.0 / 3.0));
        CHECK(pmfs[0].mass[1] == doctest::Approx(1.0 / 3.0));
        CHECK(pmfs[1].support == std::vector<NodeId>{3});
        CHECK(pmfs[1].mass[0] == doctest::Approx(1.0));
    }
    SUBCASE("remainder edges are dropped") {
        const auto ds = synth::random_stream(3, 7, 4);
        const auto pmfs = window_pmfs(DatasetView::whole(ds), {.n_windows = 2});
        REQUIRE(pmfs.size() == 2);
        // K = 3; the 7th edge contributes to no window.
        double mass0 = 0.0;
        for (double m : pmfs[0].mass) mass0 += m;
        CHECK(mass0 == doctest::Approx(1.0));
    }
    SUBCASE("fewer edges than windows") {
        const auto ds = synth::random_stream(4, 1, 4);
        CHECK_THROWS_AS(window_pmfs(DatasetView::whole(ds), {.n_windows = 2}), Error);
    }
    SUBCASE("support sorted, masses positive and normalized") {
        const auto ds = synth::zipf_stream(9, 3000, 100, 1.1, 300, 11);
        for (const auto& pmf : window_pmfs(DatasetView::whole(ds), {.n_windows = 10})) {
            double total = 0.0;
            for (std::size_t i = 0; i < pmf.support.size(); ++i) {
                if (i > 0) CHECK(pmf.support[i] > pmf.support[i - 1]);
                CHECK(pmf.mass[i] > 0.0);
                total += pmf.mass[i];
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("wasserstein1 basics") {
    SUBCASE("identical PMFs have zero distance") {
        const auto p = delta(5);
        CHECK(wasserstein1(p, p, GroundMetric::index_line) == 0.0);
        CHECK(wasserstein1(p, p, GroundMetric::discrete) == 0.0);
    }
    SUBCASE("unit transport between adjacent deltas") {
        CHECK(wasserstein1(delta(0), delta(1), GroundMetric::index_line) == 1.0);
        CHECK(wasserstein1(delta(0), delta(1), GroundMetric::discrete) == 1.0);
    }
    SUBCASE("split mass to the middle") {
        WindowPmf p;
        p.support = {0, 2};
        p.mass = {0.5, 0.5};
        const WindowPmf q = delta(1);
        CHECK(wasserstein1(p, q, GroundMetric::index_line) == doctest::Approx(1.0));
        // LP oracle agrees on the 3-point support.
        IntPmf ip{{0, 2}, {1, 1}};
        IntPmf iq{{1}, {2}};
        CHECK(oracle::lp_wasserstein1(ip, iq, false) == doctest::Approx(1.0));
    }
    SUBCASE("distant deltas scale with the gap") {
        CHECK(wasserstein1(delta(0), delta(7), GroundMetric::index_line) == 7.0);
        CHECK(wasserstein1(delta(0), delta(7), GroundMetric::discrete) == 1.0);
    }
    SUBCASE("unnormalized input is rejected") {
        WindowPmf bad;
        bad.support = {0, 1};
        bad.mass = {0.5, 0.6};
        CHECK_THROWS_AS(wasserstein1(bad, delta(0), GroundMetric::index_line), Error);
    }
}

TEST_CASE("index-line W1 equals the transport LP on random instances") {
    SplitMix64 rng(0xabcdef);
    for (int trial = 0; trial < 300; ++trial) {
        IntPmf ip = random_int_pmf(rng, 8, 40);
        IntPmf iq = random_int_pmf(rng, 8, 40);
        align_totals(ip, iq);
        const double expected = oracle::lp_wasserstein1(ip, iq, false);
        const double got = wasserstein1(ip.to_pmf(), iq.to_pmf(), GroundMetric::index_line);
        CHECK(std::abs(got - expected) <= 1e-9);
    }
}

TEST_CASE("discrete W1 is exactly half the L1 distance and matches the LP") {
    SplitMix64 rng(0xfeed);
    for (int trial = 0; trial < 100; ++trial) {
        IntPmf ip = random_int_pmf(rng, 8, 20);
        IntPmf iq = random_int_pmf(rng, 8, 20);
        align_totals(ip, iq);
        const WindowPmf p = ip.to_pmf();
        const WindowPmf q = iq.to_pmf();

        double l1 = 0.0;
        for (std::uint32_t id = 0; id < 20; ++id) {
            double mp = 0.0;
            double mq = 0.0;
            for (std::size_t i = 0; i < p.support.size(); ++i)
                if (p.support[i] == id) mp = p.mass[i];
            for (std::size_t i = 0; i < q.support.size(); ++i)
                if (q.support[i] == id) mq = q.mass[i];
            l1 += std::abs(mp - mq);
        }
        const double got = wasserstein1(p, q, GroundMetric::discrete);
        CHECK(got == doctest::Approx(0.5 * l1).epsilon(1e-12));
        CHECK(std::abs(got - oracle::lp_wasserstein1(ip, iq, true)) <= 1e-9);
    }
}

TEST_CASE("metric axioms on random triples") {
    SplitMix64 rng(0x7777);
    for (auto mode : {GroundMetric::index_line, GroundMetric::discrete}) {
        for (int trial = 0; trial < 60; ++trial) {
            const WindowPmf p = random_int_pmf(rng, 6, 25).to_pmf();
            const WindowPmf q = random_int_pmf(rng, 6, 25).to_pmf();
            const WindowPmf r = random_int_pmf(rng, 6, 25).to_pmf();
            const double pq = wasserstein1(p, q, mode);
            const double qp = wasserstein1(q, p, mode);
            const double qr = wasserstein1(q, r, mode);
            const double pr = wasserstein1(p, r, mode);
            CHECK(pq >= 0.0);
            CHECK(pq == doctest::Approx(qp).epsilon(1e-12));       // symmetry
            CHECK(pr <= pq + qr + 1e-12);                          // triangle inequality
            CHECK(wasserstein1(p, p, mode) == 0.0);                // identity
        }
    }
}

TEST_CASE("discrete mode is permutation invariant") {
    SplitMix64 rng(0x3333);
    const IntPmf ip = random_int_pmf(rng, 6, 30);
    const IntPmf iq = [&] {
        IntPmf q = random_int_pmf(rng, 6, 30);
        return q;
    }();
    IntPmf ip2 = ip;
    IntPmf iq2 = iq;
    align_totals(ip2, iq2);

    // Permute ids by reversing the 0..29 range.
    auto permute = [](IntPmf pmf) {
        for (auto& id : pmf.support) id = 29 - id;
        std::vector<std::size_t> order(pmf.support.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return pmf.support[a] < pmf.support[b]; });
        IntPmf out;
        for (std::size_t i : order) {
            out.support.push_back(pmf.support[i]);
            out.weight.push_back(pmf.weight[i]);
        }
        return out;
    };
    const IntPmf pp = permute(ip2);
    const IntPmf qq = permute(iq2);
    CHECK(wasserstein1(ip2.to_pmf(), iq2.to_pmf(), GroundMetric::discrete) ==
          doctest::Approx(wasserstein1(pp.to_pmf(), qq.to_pmf(), GroundMetric::discrete))
              .epsilon(1e-12));
}

TEST_CASE("w_short") {
    SUBCASE("identical windows give zero") {
        std::vector<EdgeEvent> edges;
        for (int i = 0; i < 40; ++i) edges.push_back({0, 3, static_cast<Timestamp>(i)});
        const TemporalDataset ds(std::move(edges), "c");
        const auto m = w_short(DatasetView::whole(ds), {.n_windows = 4});
        CHECK(m.value == 0.0);
        for (double d : m.series) CHECK(d == 0.0);
    }
    SUBCASE("two delta windows at distance one") {
        std::vector<EdgeEvent> edges;
        for (int i = 0; i < 4; ++i)
            edges.push_back({0, i < 2 ? NodeId{0} : NodeId{1}, static_cast<Timestamp>(i)});
        const TemporalDataset ds(std::move(edges), "d");
        const auto m = w_short(DatasetView::whole(ds), {.n_windows = 2});
        REQUIRE(m.series.size() == 1);
        CHECK(m.value == 1.0);
    }
    SUBCASE("drifting beats stationary") {
        const auto stationary = synth::zipf_stream(100, 8000, 200, 1.2, 400, 0);
        const auto drifting = synth::zipf_stream(100, 8000, 200, 1.2, 400, 53);
        for (auto mode : {GroundMetric::index_line, GroundMetric::discrete}) {
            const MeasureConfig cfg{20, mode};
            const double ws = w_short(DatasetView::whole(stationary), cfg).value;
            const double wd = w_short(DatasetView::whole(drifting), cfg).value;
            CHECK(wd > ws);
        }
    }
}

TEST_CASE("w_long") {
    SUBCASE("identical windows give a zero matrix") {
        std::vector<EdgeEvent> edges;
        for (int i = 0; i < 30; ++i) edges.push_back({0, 5, static_cast<Timestamp>(i)});
        const TemporalDataset ds(std::move(edges), "c");
        const auto m = w_long(DatasetView::whole(ds), {.n_windows = 3});
        CHECK(m.value == 0.0);
        for (const auto& row : m.matrix)
            for (double v : row) CHECK(v == 0.0);
    }
    SUBCASE("three deltas: pair distances 1, 1, 2") {
        std::vector<EdgeEvent> edges;
        for (int i = 0; i < 6; ++i)
            edges.push_back({0, static_cast<NodeId>(i / 2), static_cast<Timestamp>(i)});
        const TemporalDataset ds(std::move(edges), "deltas");
        const auto m = w_long(DatasetView::whole(ds), {.n_windows = 3});
        CHECK(m.matrix[0][1] == 1.0);
        CHECK(m.matrix[1][2] == 1.0);
        CHECK(m.matrix[0][2] == 2.0);
        CHECK(m.value == doctest::Approx(4.0 / 3.0));
    }
    SUBCASE("scalar equals the mean of the strict lower triangle") {
        const auto ds = synth::zipf_stream(200, 5000, 80, 1.1, 250, 13);
        const auto m = w_long(DatasetView::whole(ds), {.n_windows = 10});
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 1; i < m.matrix.size(); ++i)
            for (std::size_t j = 0; j < i; ++j) {
                sum += m.matrix[i][j];
                ++count;
            }
        CHECK(m.value == doctest::Approx(sum / static_cast<double>(count)).epsilon(1e-12));
    }
}

TEST_CASE("matrix is symmetric with zero diagonal; series is the superdiagonal") {
    const auto ds = synth::zipf_stream(77, 6000, 120, 1.3, 300, 29);
    const MeasureConfig cfg{12, GroundMetric::index_line};
    const auto pmfs = window_pmfs(DatasetView::whole(ds), cfg);
    const auto ml = w_long_from_pmfs(pmfs, cfg.ground_metric);
    const auto ms = w_short_from_pmfs(pmfs, cfg.ground_metric);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(ml.matrix[i][i] == 0.0);
        for (std::size_t j = 0; j < i; ++j) CHECK(ml.matrix[i][j] == ml.matrix[j][i]);
    }
    for (std::size_t i = 0; i + 1 < 12; ++i) CHECK(ms.series[i] == ml.matrix[i][i + 1]);
}

TEST_CASE("threaded pairwise computation is bit-identical to serial") {
    const auto ds = synth::zipf_stream(88, 4000, 90, 1.2, 200, 17);
    const MeasureConfig cfg{16, GroundMetric::index_line};
    const auto pmfs = window_pmfs(DatasetView::whole(ds), cfg);
    const auto serial = w_long_from_pmfs(pmfs, cfg.ground_metric, 1);
    const auto threaded = w_long_from_pmfs(pmfs, cfg.ground_metric, 8);
    CHECK(serial.value == threaded.value);
    CHECK(serial.matrix == threaded.matrix);
}
