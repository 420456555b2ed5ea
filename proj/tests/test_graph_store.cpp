#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"
#include "tgdyn/graph_store.hpp"
#include "tgdyn/io_util.hpp"

using namespace tgdyn;
using testutil::write_text;

namespace {
struct TempDir : testutil::TempDir {
    TempDir() : testutil::TempDir("graph_store") {}
};
}  // namespace

TEST_CASE("load sorts stably by timestamp") {
    TempDir dir;
    write_text(dir.file("a.csv"), "0,1,5\n2,3,1\n0,2,5\n");
    const auto loaded = load_edge_list(dir.file("a.csv"));
    const auto& edges = loaded.dataset.edges();
    REQUIRE(edges.size() == 3);
    CHECK(edges[0] == EdgeEvent{2, 3, 1});
    CHECK(edges[1] == EdgeEvent{0, 1, 5});
    CHECK(edges[2] == EdgeEvent{0, 2, 5});  // input order kept within t=5
    CHECK(loaded.dataset.num_nodes() == 4);
}

TEST_CASE("load rejects an empty file") {
    TempDir dir;
    write_text(dir.file("empty.csv"), "");
    CHECK_THROWS_WITH_AS(load_edge_list(dir.file("empty.csv")),
                         doctest::Contains("empty dataset"), Error);
}

TEST_CASE("load reports the malformed row") {
    TempDir dir;
    write_text(dir.file("bad.csv"), "a,b,c\n");
    try {
        load_edge_list(dir.file("bad.csv"));
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::data);
        CHECK(e.row() == 1);
    }

    write_text(dir.file("bad2.csv"), "0,1,2\n1,x,3\n");
    try {
        load_edge_list(dir.file("bad2.csv"));
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.row() == 2);
    }
}

TEST_CASE("load format options") {
    TempDir dir;
    SUBCASE("header, delimiter and column order") {
        write_text(dir.file("f.tsv"), "time\tdst\tsrc\n7\t1\t0\n");
        FormatConfig fmt;
        fmt.delimiter = '\t';
        fmt.has_header = true;
        fmt.columns = {2, 1, 0};  // src, dst, t positions
        const auto loaded = load_edge_list(dir.file("f.tsv"), fmt);
        REQUIRE(loaded.dataset.num_edges() == 1);
        CHECK(loaded.dataset.edges()[0] == EdgeEvent{0, 1, 7});
    }
    SUBCASE("fixed-point timestamps") {
        write_text(dir.file("fp.csv"), "0,1,3.25\n1,0,1.5\n");
        FormatConfig fmt;
        fmt.time_decimals = 2;
        const auto loaded = load_edge_list(dir.file("fp.csv"), fmt);
        CHECK(loaded.dataset.edges()[0].t == 150);
        CHECK(loaded.dataset.edges()[1].t == 325);
    }
    SUBCASE("id remapping is first-appearance dense") {
        write_text(dir.file("r.csv"), "100,7,1\n7,100,2\n9000000000,7,3\n");
        FormatConfig fmt;
        fmt.remap_ids = true;
        const auto loaded = load_edge_list(dir.file("r.csv"), fmt);
        CHECK(loaded.dataset.edges()[0] == EdgeEvent{0, 1, 1});
        CHECK(loaded.dataset.edges()[1] == EdgeEvent{1, 0, 2});
        CHECK(loaded.dataset.edges()[2] == EdgeEvent{2, 1, 3});
        REQUIRE(loaded.id_map.size() == 3);
        CHECK(loaded.id_map[0].original == 100);
        CHECK(loaded.id_map[2].original == 9000000000ULL);
    }
    SUBCASE("num_nodes override must cover the ids") {
        write_text(dir.file("o.csv"), "0,5,1\n");
        FormatConfig fmt;
        fmt.num_nodes_override = 4;
        CHECK_THROWS_AS(load_edge_list(dir.file("o.csv"), fmt), Error);
        fmt.num_nodes_override = 10;
        CHECK(load_edge_list(dir.file("o.csv"), fmt).dataset.num_nodes() == 10);
    }
}

TEST_CASE("round trip: load, write, load") {
    TempDir dir;
    const auto ds = synth::random_stream(11, 500, 40);
    write_edge_list(ds, dir.file("w.csv"));
    const auto loaded = load_edge_list(dir.file("w.csv"));
    CHECK(loaded.dataset.edges() == ds.edges());

    // Canonical output re-ingests byte-identically.
    write_edge_list(loaded.dataset, dir.file("w2.csv"));
    CHECK(read_file(dir.file("w.csv")) == read_file(dir.file("w2.csv")));
}

TEST_CASE("ratio split lengths") {
    SplitSpec spec;  // 0.70 / 0.15 defaults
    SUBCASE("10 edges -> 7/1/2") {
        const auto ds = synth::random_stream(1, 10, 5);
        const auto views = chronological_split(ds, spec);
        CHECK(views.train.size() == 7);
        CHECK(views.val.size() == 1);
        CHECK(views.test.size() == 2);
    }
    SUBCASE("100 edges -> 70/15/15") {
        const auto ds = synth::random_stream(2, 100, 5);
        const auto views = chronological_split(ds, spec);
        CHECK(views.train.size() == 70);
        CHECK(views.val.size() == 15);
        CHECK(views.test.size() == 15);
    }
}

TEST_CASE("boundary split") {
    std::vector<EdgeEvent> edges;
    for (int i = 0; i < 10; ++i)
        edges.push_back({0, 1, static_cast<Timestamp>(i)});
    const TemporalDataset ds(std::move(edges), "b");

    SplitSpec spec;
    spec.mode = SplitSpec::Mode::boundary;
    spec.train_end_t = 4;
    spec.val_end_t = 6;
    const auto views = chronological_split(ds, spec);
    CHECK(views.train.size() == 5);  // t <= 4
    CHECK(views.val.size() == 2);    // t in (4, 6]
    CHECK(views.test.size() == 3);

    SUBCASE("empty segment is an error") {
        std::vector<EdgeEvent> nines;
        for (int i = 0; i < 4; ++i) nines.push_back({0, 1, 9});
        const TemporalDataset all_nine(std::move(nines), "n");
        SplitSpec bad;
        bad.mode = SplitSpec::Mode::boundary;
        bad.train_end_t = 5;
        bad.val_end_t = 9;
        CHECK_THROWS_WITH_AS(chronological_split(all_nine, bad), doctest::Contains("empty split"),
                             Error);
    }
}

TEST_CASE("splits partition the stream") {
    const auto ds = synth::random_stream_grouped_t(3, 333, 20, 4);
    SplitSpec spec;
    const auto views = chronological_split(ds, spec);
    CHECK(views.train.size() + views.val.size() + views.test.size() == ds.num_edges());
    CHECK(views.train.events().back().t <= views.val.events().front().t);
    CHECK(views.val.events().back().t <= views.test.events().front().t);
    CHECK(views.val.offset() == views.train.size());
}

TEST_CASE("batching") {
    const auto ds = synth::random_stream(4, 5, 4);
    const auto view = DatasetView::whole(ds);

    SUBCASE("5 edges, batch 2 -> sizes 2,2,1") {
        std::vector<std::size_t> sizes;
        for (const EdgeBatch& b : batch_iter(view, 2)) sizes.push_back(b.events.size());
        CHECK(sizes == std::vector<std::size_t>{2, 2, 1});
    }
    SUBCASE("batch size equal to the stream is one batch") {
        const auto big = synth::random_stream(5, 200, 4);
        std::size_t count = 0;
        for ([[maybe_unused]] const EdgeBatch& b : batch_iter(DatasetView::whole(big), 200))
            ++count;
        CHECK(count == 1);
    }
    SUBCASE("zero batch size is rejected") {
        CHECK_THROWS_AS(batch_iter(view, 0), Error);
    }
    SUBCASE("empty view yields no batches") {
        const DatasetView empty(ds, 2, 2);
        std::size_t count = 0;
        for ([[maybe_unused]] const EdgeBatch& b : batch_iter(empty, 3)) ++count;
        CHECK(count == 0);
    }
}

TEST_CASE("batch concatenation equals the source for random sizes") {
    const auto ds = synth::random_stream(6, 257, 16);
    const auto view = DatasetView::whole(ds);
    SplitMix64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t bs = 1 + rng.next_below(300);
        std::vector<EdgeEvent> rebuilt;
        std::size_t expected_offset = 0;
        for (const EdgeBatch& b : batch_iter(view, bs)) {
            CHECK(b.offset == expected_offset);
            expected_offset += b.events.size();
            rebuilt.insert(rebuilt.end(), b.events.begin(), b.events.end());
        }
        CHECK(rebuilt == ds.edges());
    }
}

TEST_CASE("dataset stats") {
    SUBCASE("single edge") {
        const TemporalDataset ds({{0, 1, 5}}, "s");
        const Stats st = dataset_stats(ds);
        CHECK(st.num_edges == 1);
        CHECK(st.num_nodes == 2);
        CHECK(st.num_distinct_dst == 1);
        CHECK(st.t_min == 5);
        CHECK(st.t_max == 5);
    }
    SUBCASE("empty dataset reports absent timestamps") {
        const TemporalDataset ds;
        const Stats st = dataset_stats(ds);
        CHECK(st.num_edges == 0);
        CHECK(st.num_nodes == 0);
        CHECK(st.num_distinct_dst == 0);
        CHECK_FALSE(st.t_min.has_value());
        CHECK_FALSE(st.t_max.has_value());
    }
    SUBCASE("repeated destination counted once") {
        const TemporalDataset ds({{0, 1, 1}, {0, 1, 2}}, "r");
        CHECK(dataset_stats(ds).num_distinct_dst == 1);
    }
}

TEST_CASE("id map file format") {
    TempDir dir;
    write_id_map({{100, 0}, {7, 1}}, dir.file("m.csv"));
    CHECK(read_file(dir.file("m.csv")) == "100,0\n7,1\n");
}
