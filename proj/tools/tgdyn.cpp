// tgdyn: temporal-graph dynamics toolkit.
//
// Subcommands: ingest, stats, measure, poptrack, gen-negatives, eval,
// saturation. Every command is a pure function of its input files, flags and
// seed; outputs land under --out with stable names, written atomically, and a
// resolved_config.json records the effective parameters of each run.

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "tgdyn/dynamics.hpp"
#include "tgdyn/error.hpp"
#include "tgdyn/evaluation.hpp"
#include "tgdyn/graph_store.hpp"
#include "tgdyn/io_util.hpp"
#include "tgdyn/negatives.hpp"
#include "tgdyn/poptrack.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string input;
    std::string out_dir;
    unsigned threads = 1;

    tgdyn::FormatConfig format;
    std::string columns = "src,dst,t";
    int time_decimals = -1;
    std::uint64_t num_nodes_override = 0;

    std::string split_mode = "ratio";
    double train_fraction = 0.70;
    double val_fraction = 0.15;
    std::int64_t train_end_t = 0;
    std::int64_t val_end_t = 0;
};

void add_input_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--input", o.input, "Edge-list file (src,dst,t records)")->required();
    cmd->add_option("--delimiter", o.format.delimiter, "Field delimiter (default ',')");
    cmd->add_flag("--header", o.format.has_header, "Skip the first line of the input");
    cmd->add_option("--columns", o.columns,
                    "Order of the src,dst,t columns in the input (default src,dst,t)");
    cmd->add_option("--time-decimals", o.time_decimals,
                    "Parse timestamps as reals with this many fixed-point decimals");
    cmd->add_option("--num-nodes", o.num_nodes_override,
                    "Override the node count (must be >= max id + 1)");
    cmd->add_option("--name", o.format.dataset_name, "Dataset name (default: file stem)");
}

void add_out_flags(CLI::App* cmd, CommonOpts& o, bool required = true) {
    auto* opt = cmd->add_option("--out", o.out_dir, "Output directory");
    if (required) opt->required();
    cmd->add_option("--threads", o.threads, "Worker thread cap (default 1)");
}

void add_split_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--split-mode", o.split_mode, "ratio or boundary (default ratio)")
        ->check(CLI::IsMember({"ratio", "boundary"}));
    cmd->add_option("--train-fraction", o.train_fraction, "Train share in ratio mode");
    cmd->add_option("--val-fraction", o.val_fraction, "Validation share in ratio mode");
    cmd->add_option("--train-end-t", o.train_end_t, "Last train timestamp in boundary mode");
    cmd->add_option("--val-end-t", o.val_end_t, "Last validation timestamp in boundary mode");
}

tgdyn::FormatConfig resolve_format(CommonOpts& o) {
    tgdyn::FormatConfig fmt = o.format;
    if (o.time_decimals >= 0) fmt.time_decimals = o.time_decimals;
    if (o.num_nodes_override > 0) fmt.num_nodes_override = o.num_nodes_override;

    std::array<int, 3> cols{};
    std::stringstream ss(o.columns);
    std::string field;
    int pos = 0;
    int seen = 0;
    while (std::getline(ss, field, ',')) {
        if (field == "src") cols[0] = pos;
        else if (field == "dst") cols[1] = pos;
        else if (field == "t") cols[2] = pos;
        else tgdyn::fail_validation("--columns must name src, dst and t");
        ++pos;
        ++seen;
    }
    if (seen != 3) tgdyn::fail_validation("--columns must name src, dst and t exactly once");
    fmt.columns = cols;
    return fmt;
}

tgdyn::SplitSpec resolve_split(const CommonOpts& o) {
    tgdyn::SplitSpec spec;
    if (o.split_mode == "boundary") {
        spec.mode = tgdyn::SplitSpec::Mode::boundary;
        spec.train_end_t = o.train_end_t;
        spec.val_end_t = o.val_end_t;
    } else {
        spec.mode = tgdyn::SplitSpec::Mode::ratio;
        spec.train_fraction = o.train_fraction;
        spec.val_fraction = o.val_fraction;
    }
    return spec;
}

json split_config_json(const CommonOpts& o) {
    if (o.split_mode == "boundary")
        return {{"mode", "boundary"}, {"train_end_t", o.train_end_t}, {"val_end_t", o.val_end_t}};
    return {{"mode", "ratio"},
            {"train_fraction", o.train_fraction},
            {"val_fraction", o.val_fraction}};
}

json input_config_json(const CommonOpts& o) {
    return {{"input", o.input},
            {"delimiter", std::string(1, o.format.delimiter)},
            {"header", o.format.has_header},
            {"columns", o.columns},
            {"time_decimals", o.time_decimals},
            {"num_nodes_override", o.num_nodes_override},
            {"threads", o.threads}};
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) tgdyn::fail_data("cannot create output directory " + dir + ": " + ec.message());
}

void emit(const std::string& dir, const std::string& name, const std::string& content) {
    tgdyn::write_file_atomic((fs::path(dir) / name).string(), content);
}

void emit_json(const std::string& dir, const std::string& name, const json& j) {
    emit(dir, name, j.dump(2) + "\n");
}

std::string stats_json_str(const tgdyn::Stats& s) {
    json j = {{"num_edges", s.num_edges},
              {"num_nodes", s.num_nodes},
              {"num_distinct_dst", s.num_distinct_dst}};
    if (s.t_min) j["t_min"] = *s.t_min;
    if (s.t_max) j["t_max"] = *s.t_max;
    return j.dump(2) + "\n";
}

std::string format_series(const std::vector<double>& series) {
    std::string out;
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, series[i]);
        out += buf;
    }
    return out;
}

std::string format_matrix(const std::vector<std::vector<double>>& m) {
    std::string out;
    char buf[64];
    for (const auto& row : m) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            std::snprintf(buf, sizeof buf, j + 1 < row.size() ? "%.17g," : "%.17g\n", row[j]);
            out += buf;
        }
    }
    return out;
}

std::string format_per_edge_rr(const std::vector<double>& rr) {
    std::string out;
    char buf[64];
    for (std::size_t i = 0; i < rr.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, rr[i]);
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------- commands

int cmd_ingest(CommonOpts& o, bool remap) {
    ensure_out_dir(o.out_dir);
    tgdyn::FormatConfig fmt = resolve_format(o);
    fmt.remap_ids = remap;
    const tgdyn::LoadResult loaded = tgdyn::load_edge_list(o.input, fmt);

    tgdyn::write_edge_list(loaded.dataset, (fs::path(o.out_dir) / "dataset.csv").string());
    emit(o.out_dir, "stats.json", stats_json_str(tgdyn::dataset_stats(loaded.dataset)));
    if (remap)
        tgdyn::write_id_map(loaded.id_map, (fs::path(o.out_dir) / "idmap.csv").string());

    json cfg = input_config_json(o);
    cfg["command"] = "ingest";
    cfg["remap"] = remap;
    cfg["dataset_name"] = loaded.dataset.name();
    emit_json(o.out_dir, "resolved_config.json", cfg);
    return 0;
}

int cmd_stats(CommonOpts& o) {
    const auto loaded = tgdyn::load_edge_list(o.input, resolve_format(o));
    const std::string body = stats_json_str(tgdyn::dataset_stats(loaded.dataset));
    if (o.out_dir.empty()) {
        std::cout << body;
    } else {
        ensure_out_dir(o.out_dir);
        emit(o.out_dir, "stats.json", body);
        json cfg = input_config_json(o);
        cfg["command"] = "stats";
        emit_json(o.out_dir, "resolved_config.json", cfg);
    }
    return 0;
}

int cmd_measure(CommonOpts& o, std::size_t windows) {
    ensure_out_dir(o.out_dir);
    const auto loaded = tgdyn::load_edge_list(o.input, resolve_format(o));
    const auto view = tgdyn::DatasetView::whole(loaded.dataset);

    tgdyn::MeasureConfig cfg;
    cfg.n_windows = windows;
    const auto pmfs = tgdyn::window_pmfs(view, cfg);

    json result = {{"dataset", loaded.dataset.name()},
                   {"n_windows", windows},
                   {"samples_per_window", view.size() / windows},
                   {"num_edges_used", (view.size() / windows) * windows}};
    for (auto mode : {tgdyn::GroundMetric::index_line, tgdyn::GroundMetric::discrete}) {
        const auto ms = tgdyn::w_short_from_pmfs(pmfs, mode, o.threads);
        const auto ml = tgdyn::w_long_from_pmfs(pmfs, mode, o.threads);
        const std::string tag = mode == tgdyn::GroundMetric::index_line ? "indexline" : "discrete";
        result["w_short"][tgdyn::ground_metric_name(mode)] = ms.value;
        result["w_long"][tgdyn::ground_metric_name(mode)] = ml.value;
        emit(o.out_dir, "wshort_series_" + tag + ".txt", format_series(ms.series));
        emit(o.out_dir, "wlong_matrix_" + tag + ".txt", format_matrix(ml.matrix));
    }
    emit_json(o.out_dir, "measure.json", result);

    json cfg_out = input_config_json(o);
    cfg_out["command"] = "measure";
    cfg_out["n_windows"] = windows;
    emit_json(o.out_dir, "resolved_config.json", cfg_out);
    std::cout << result.dump(2) << std::endl;
    return 0;
}

int cmd_poptrack(CommonOpts& o, double lambda, const std::string& grid_arg,
                 std::size_t batch_size, const std::string& negatives_path,
                 const std::string& test_negatives_path, bool per_edge_rr,
                 bool save_state) {
    ensure_out_dir(o.out_dir);
    const auto loaded = tgdyn::load_edge_list(o.input, resolve_format(o));
    const auto splits = tgdyn::chronological_split(loaded.dataset, resolve_split(o));

    const tgdyn::NegativeSampleSet negatives = tgdyn::load_negatives(negatives_path);
    json cfg_out = input_config_json(o);
    cfg_out["command"] = "poptrack";
    cfg_out["split"] = split_config_json(o);
    cfg_out["batch_size"] = batch_size;
    cfg_out["negatives"] = negatives_path;

    double chosen_lambda = lambda;
    if (!grid_arg.empty()) {
        std::vector<double> grid;
        std::stringstream ss(grid_arg);
        std::string field;
        while (std::getline(ss, field, ',')) grid.push_back(std::stod(field));
        const auto gs = tgdyn::grid_search_lambda(splits, grid, batch_size, negatives);
        chosen_lambda = gs.best_lambda;

        json table = json::array();
        for (const auto& [l, mrr] : gs.table) table.push_back({{"lambda", l}, {"mrr", mrr}});
        emit_json(o.out_dir, "grid_table.json",
                  json{{"best_lambda", gs.best_lambda}, {"table", table}});
        cfg_out["grid"] = grid_arg;
    }
    cfg_out["lambda"] = chosen_lambda;

    // With a grid, the final report is for the best lambda on the test set
    // when one is provided, otherwise on the grid's own validation set.
    const tgdyn::NegativeSampleSet* final_set = &negatives;
    tgdyn::NegativeSampleSet test_set;
    if (!test_negatives_path.empty()) {
        test_set = tgdyn::load_negatives(test_negatives_path);
        final_set = &test_set;
        cfg_out["test_negatives"] = test_negatives_path;
    }
    const tgdyn::EvalReport report =
        tgdyn::run_and_score(splits, chosen_lambda, batch_size, *final_set, per_edge_rr);

    json rj = tgdyn::report_to_json(report);
    rj["lambda"] = chosen_lambda;
    rj["split"] = tgdyn::split_name(final_set->split);
    emit_json(o.out_dir, "report.json", rj);
    if (per_edge_rr) emit(o.out_dir, "per_edge_rr.txt", format_per_edge_rr(report.per_edge_rr));

    if (save_state) {
        // Final popularity state over the streamed portion, for external
        // consumers (e.g. training-time samplers).
        tgdyn::PopularityState state(loaded.dataset.num_nodes(), chosen_lambda, batch_size);
        const tgdyn::Split order[3] = {tgdyn::Split::train, tgdyn::Split::val, tgdyn::Split::test};
        for (tgdyn::Split s : order) {
            for (const auto& batch : tgdyn::batch_iter(select_split(splits, s), batch_size))
                state.consume_batch(batch);
            if (s == final_set->split) break;
        }
        tgdyn::save_state(state, (fs::path(o.out_dir) / "state.txt").string());
    }

    emit_json(o.out_dir, "resolved_config.json", cfg_out);
    std::cout << rj.dump(2) << std::endl;
    return 0;
}

int cmd_gen_negatives(CommonOpts& o, const std::string& scheme, const std::string& split_arg,
                      tgdyn::NaiveNegConfig naive_cfg, tgdyn::TopnNegConfig topn_cfg,
                      tgdyn::BlendNegConfig blend_cfg, bool binary) {
    ensure_out_dir(o.out_dir);
    const auto loaded = tgdyn::load_edge_list(o.input, resolve_format(o));
    const auto splits = tgdyn::chronological_split(loaded.dataset, resolve_split(o));
    const tgdyn::Split split = tgdyn::split_from_name(split_arg);

    tgdyn::NegativeSampleSet set;
    if (scheme == "naive") {
        set = tgdyn::gen_eval_negatives_naive(splits, split, naive_cfg, o.threads);
    } else if (scheme == "topn") {
        set = tgdyn::gen_eval_negatives_topn(splits, split, topn_cfg);
    } else if (scheme == "blend") {
        set = tgdyn::gen_eval_negatives_blend(splits, split, blend_cfg, o.threads);
    } else {
        tgdyn::fail_validation("unknown scheme: " + scheme);
    }

    const std::string name = binary ? "negatives.bin" : "negatives.jsonl";
    tgdyn::save_negatives(set, (fs::path(o.out_dir) / name).string(), binary);

    json cfg_out = input_config_json(o);
    cfg_out["command"] = "gen-negatives";
    cfg_out["split"] = split_config_json(o);
    cfg_out["eval_split"] = split_arg;
    cfg_out["scheme"] = scheme;
    cfg_out["params"] = set.params;
    cfg_out["binary"] = binary;
    emit_json(o.out_dir, "resolved_config.json", cfg_out);
    return 0;
}

int cmd_eval(CommonOpts& o, const std::string& model, double lambda, std::size_t batch_size,
             std::int64_t window, const std::string& negatives_path,
             const std::string& scores_path, bool all, const std::string& split_arg,
             bool per_edge_rr) {
    ensure_out_dir(o.out_dir);
    const auto loaded = tgdyn::load_edge_list(o.input, resolve_format(o));
    const auto splits = tgdyn::chronological_split(loaded.dataset, resolve_split(o));

    json cfg_out = input_config_json(o);
    cfg_out["command"] = "eval";
    cfg_out["split"] = split_config_json(o);
    cfg_out["model"] = model;
    cfg_out["batch_size"] = batch_size;

    tgdyn::EvalReport report;
    if (model == "scores-file") {
        if (scores_path.empty()) tgdyn::fail_validation("--scores is required for scores-file");
        const tgdyn::ScoreDump dump = tgdyn::load_score_dump(scores_path);
        report = tgdyn::evaluate_score_dump(dump, splits, "MRR_scores", per_edge_rr);
        cfg_out["scores"] = scores_path;
    } else {
        auto make_scorer = [&]() -> std::unique_ptr<tgdyn::Scorer> {
            if (model == "poptrack") {
                cfg_out["lambda"] = lambda;
                return std::make_unique<tgdyn::PopTrackScorer>(loaded.dataset.num_nodes(),
                                                               lambda, batch_size);
            }
            if (model == "edgebank-inf")
                return std::make_unique<tgdyn::EdgeBankScorer>(tgdyn::EdgeBankScorer::infinite());
            if (model == "edgebank-tw") {
                tgdyn::Timestamp w = window;
                if (w <= 0) {
                    // Default to the evaluation split's time span.
                    const tgdyn::Split s = all ? tgdyn::split_from_name(split_arg)
                                               : tgdyn::load_negatives(negatives_path).split;
                    const auto view = select_split(splits, s);
                    w = std::max<tgdyn::Timestamp>(
                        1, view.events().back().t - view.events().front().t);
                }
                cfg_out["window"] = w;
                return std::make_unique<tgdyn::EdgeBankScorer>(tgdyn::EdgeBankScorer::window(w));
            }
            tgdyn::fail_validation("unknown model: " + model);
        };
        auto scorer = make_scorer();
        if (all) {
            const tgdyn::Split split = tgdyn::split_from_name(split_arg);
            report = tgdyn::evaluate_all(*scorer, splits, split, batch_size, per_edge_rr);
            cfg_out["all"] = true;
            cfg_out["eval_split"] = split_arg;
        } else {
            if (negatives_path.empty())
                tgdyn::fail_validation("--negatives is required unless --all is given");
            const tgdyn::NegativeSampleSet negatives = tgdyn::load_negatives(negatives_path);
            report = tgdyn::evaluate(*scorer, splits, negatives, batch_size, per_edge_rr);
            cfg_out["negatives"] = negatives_path;
        }
    }

    emit_json(o.out_dir, "report.json", tgdyn::report_to_json(report));
    if (per_edge_rr) emit(o.out_dir, "per_edge_rr.txt", format_per_edge_rr(report.per_edge_rr));
    emit_json(o.out_dir, "resolved_config.json", cfg_out);
    std::cout << tgdyn::report_to_json(report).dump(2) << std::endl;
    return 0;
}

int cmd_saturation(CommonOpts& o, const std::string& scores_path, const std::string& k_arg,
                   const std::string& n_arg, double threshold, double epsilon) {
    ensure_out_dir(o.out_dir);
    const auto loaded = tgdyn::load_edge_list(o.input, resolve_format(o));
    const auto splits = tgdyn::chronological_split(loaded.dataset, resolve_split(o));
    const tgdyn::ScoreDump dump = tgdyn::load_score_dump(scores_path);

    tgdyn::SaturationConfig cfg;
    auto parse_list = [](const std::string& arg, std::vector<std::size_t>& out) {
        if (arg.empty()) return;
        out.clear();
        std::stringstream ss(arg);
        std::string field;
        while (std::getline(ss, field, ',')) out.push_back(std::stoull(field));
    };
    parse_list(k_arg, cfg.k_list);
    parse_list(n_arg, cfg.n_list);
    cfg.threshold = threshold;
    cfg.epsilon = epsilon;

    const auto cells = tgdyn::saturation_report(dump, splits, cfg);

    json rows = json::array();
    std::string table = "K,N,candidates_in_class,saturated,percent\n";
    char buf[128];
    for (const auto& c : cells) {
        json row = {{"k", c.k},
                    {"n", c.n},
                    {"candidates_in_class", c.candidates_in_class},
                    {"saturated", c.saturated}};
        if (c.defined()) {
            row["percent"] = c.percent();
            std::snprintf(buf, sizeof buf, "%zu,%zu,%llu,%llu,%.4f\n", c.k, c.n,
                          static_cast<unsigned long long>(c.candidates_in_class),
                          static_cast<unsigned long long>(c.saturated), c.percent());
        } else {
            row["percent"] = nullptr;  // no candidates fell in the class
            std::snprintf(buf, sizeof buf, "%zu,%zu,0,0,N/A\n", c.k, c.n);
        }
        rows.push_back(std::move(row));
        table += buf;
    }
    emit_json(o.out_dir, "saturation.json", json{{"cells", rows}});
    emit(o.out_dir, "saturation.txt", table);

    json cfg_out = input_config_json(o);
    cfg_out["command"] = "saturation";
    cfg_out["split"] = split_config_json(o);
    cfg_out["scores"] = scores_path;
    cfg_out["threshold"] = threshold;
    cfg_out["epsilon"] = epsilon;
    emit_json(o.out_dir, "resolved_config.json", cfg_out);
    std::cout << table;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tgdyn: temporal-graph dynamics, popularity baselines and "
                 "link-prediction evaluation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI/TOML file (flags win)");

    CommonOpts o;

    auto* ingest = app.add_subcommand("ingest", "Validate and canonicalize an edge list");
    bool remap = false;
    add_input_flags(ingest, o);
    add_out_flags(ingest, o);
    ingest->add_flag("--remap", remap, "Compact sparse node ids and write idmap.csv");

    auto* stats = app.add_subcommand("stats", "Dataset statistics");
    add_input_flags(stats, o);
    add_out_flags(stats, o, /*required=*/false);

    auto* measure = app.add_subcommand("measure", "Global temporal dynamics measures");
    std::size_t windows = 100;
    add_input_flags(measure, o);
    add_out_flags(measure, o);
    measure->add_option("--windows", windows, "Number of time windows (default 100)");

    auto* poptrack = app.add_subcommand("poptrack", "Run the popularity baseline");
    double lambda = 0.96;
    std::string grid_arg;
    std::size_t batch_size = 200;
    std::string negatives_path;
    std::string test_negatives_path;
    bool per_edge_rr = false;
    bool save_state_flag = false;
    add_input_flags(poptrack, o);
    add_out_flags(poptrack, o);
    add_split_flags(poptrack, o);
    poptrack->add_option("--lambda", lambda, "Decay factor in (0, 1]");
    poptrack->add_option("--grid", grid_arg, "Comma-separated lambda grid (validation search)");
    poptrack->add_option("--batch-size", batch_size, "Stream batch size (default 200)");
    poptrack->add_option("--negatives", negatives_path, "Negative-sample set file")->required();
    poptrack->add_option("--test-negatives", test_negatives_path,
                         "Test-set negatives for the post-grid run");
    poptrack->add_flag("--per-edge-rr", per_edge_rr, "Also write per-edge reciprocal ranks");
    poptrack->add_flag("--save-state", save_state_flag, "Persist the final popularity state");

    auto* gen = app.add_subcommand("gen-negatives", "Generate fixed evaluation negatives");
    std::string scheme = "naive";
    std::string eval_split = "test";
    bool binary = false;
    tgdyn::NaiveNegConfig naive_cfg;
    tgdyn::TopnNegConfig topn_cfg;
    tgdyn::BlendNegConfig blend_cfg;
    add_input_flags(gen, o);
    add_out_flags(gen, o);
    add_split_flags(gen, o);
    gen->add_option("--scheme", scheme, "naive, topn or blend")
        ->check(CLI::IsMember({"naive", "topn", "blend"}))
        ->required();
    gen->add_option("--eval-split", eval_split, "val or test (default test)")
        ->check(CLI::IsMember({"val", "test"}));
    gen->add_option("--q", naive_cfg.q, "naive: negatives per positive (default 20)");
    gen->add_option("--hist-fraction", naive_cfg.hist_fraction,
                    "naive: historical share (default 0.5)");
    gen->add_option("--n", topn_cfg.n, "topn: list length (default 20)");
    gen->add_option("--pool", blend_cfg.pool, "blend: popularity pool size (default 1000)");
    gen->add_option("--n-top", blend_cfg.n_top, "blend: draws from the pool (default 20)");
    gen->add_option("--n-hist", blend_cfg.n_hist, "blend: historical draws (default 5)");
    gen->add_option("--n-rand", blend_cfg.n_rand, "blend: random draws (default 5)");
    double gen_lambda = 0.96;
    std::uint64_t gen_seed = 0;
    gen->add_option("--lambda", gen_lambda, "Decay for the popularity replay (default 0.96)");
    gen->add_option("--batch-size", batch_size, "Stream batch size (default 200)");
    gen->add_option("--seed", gen_seed, "RNG seed (naive and blend)");
    gen->add_flag("--binary", binary, "Write the packed binary format");

    auto* eval = app.add_subcommand("eval", "Evaluate a model on fixed negatives or all nodes");
    std::string model = "poptrack";
    std::string scores_path;
    bool eval_all_flag = false;
    std::int64_t window = 0;
    add_input_flags(eval, o);
    add_out_flags(eval, o);
    add_split_flags(eval, o);
    eval->add_option("--model", model, "poptrack, edgebank-inf, edgebank-tw or scores-file")
        ->check(CLI::IsMember({"poptrack", "edgebank-inf", "edgebank-tw", "scores-file"}))
        ->required();
    eval->add_option("--lambda", lambda, "PopTrack decay factor");
    eval->add_option("--batch-size", batch_size, "Stream batch size (default 200)");
    eval->add_option("--window", window, "EdgeBank time window (default: eval split span)");
    eval->add_option("--negatives", negatives_path, "Negative-sample set file");
    eval->add_option("--scores", scores_path, "External score dump (scores-file model)");
    eval->add_flag("--all", eval_all_flag, "Rank against all destination nodes");
    eval->add_option("--eval-split", eval_split, "Split for --all (val or test)")
        ->check(CLI::IsMember({"val", "test"}));
    eval->add_flag("--per-edge-rr", per_edge_rr, "Also write per-edge reciprocal ranks");

    auto* saturation = app.add_subcommand("saturation", "Score-saturation analysis of a dump");
    std::string k_arg;
    std::string n_arg;
    double threshold = 1.0;
    double epsilon = 0.0;
    add_input_flags(saturation, o);
    add_out_flags(saturation, o);
    add_split_flags(saturation, o);
    saturation->add_option("--scores", scores_path, "External score dump")->required();
    saturation->add_option("--k-list", k_arg, "Top-K sizes (default 50,100,1000)");
    saturation->add_option("--n-list", n_arg, "Window lengths (default 5000,20000,100000)");
    saturation->add_option("--threshold", threshold, "Saturation score (default 1.0)");
    saturation->add_option("--epsilon", epsilon, "Tolerance below the threshold (default 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help/usage
        return code == 0 ? 0 : 1;      // flag problems are validation errors
    }

    try {
        if (ingest->parsed()) return cmd_ingest(o, remap);
        if (stats->parsed()) return cmd_stats(o);
        if (measure->parsed()) return cmd_measure(o, windows);
        if (poptrack->parsed())
            return cmd_poptrack(o, lambda, grid_arg, batch_size, negatives_path,
                                test_negatives_path, per_edge_rr, save_state_flag);
        if (gen->parsed()) {
            naive_cfg.seed = gen_seed;
            blend_cfg.seed = gen_seed;
            topn_cfg.lambda = gen_lambda;
            topn_cfg.batch_size = batch_size;
            blend_cfg.lambda = gen_lambda;
            blend_cfg.batch_size = batch_size;
            return cmd_gen_negatives(o, scheme, eval_split, naive_cfg, topn_cfg, blend_cfg,
                                     binary);
        }
        if (eval->parsed())
            return cmd_eval(o, model, lambda, batch_size, window, negatives_path, scores_path,
                            eval_all_flag, eval_split, per_edge_rr);
        if (saturation->parsed())
            return cmd_saturation(o, scores_path, k_arg, n_arg, threshold, epsilon);
    } catch (const tgdyn::Error& e) {
        std::cerr << "error: " << e.what();
        if (e.row() >= 0) std::cerr << " (row " << e.row() << ")";
        std::cerr << std::endl;
        return e.kind() == tgdyn::ErrorKind::validation ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 0;
}
