// Batch front door: simulate / fit / report / predict / benchmark with file
// outputs and a manifest per run.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "spoutar/errors.hpp"
#include "spoutar/io.hpp"
#include "spoutar/posterior.hpp"
#include "spoutar/sampler.hpp"
#include "spoutar/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spoutar;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string output_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
};

std::map<std::string, std::string> effective_config(const CommonOpts& c) {
    if (c.config_path.empty()) return {};
    return load_kv_config(c.config_path);
}

template <typename T>
void maybe(const std::map<std::string, std::string>& kv,
           const std::string& key, T& out) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    if constexpr (std::is_same_v<T, bool>) {
        out = it->second == "1" || it->second == "true" || it->second == "yes";
    } else if constexpr (std::is_integral_v<T>) {
        out = static_cast<T>(std::stoll(it->second));
    } else if constexpr (std::is_floating_point_v<T>) {
        out = std::stod(it->second);
    } else {
        out = it->second;
    }
}

ChainConfig chain_config_from(const std::map<std::string, std::string>& kv) {
    ChainConfig cfg;
    maybe(kv, "iterations", cfg.total_iters);
    maybe(kv, "burn_in", cfg.burn_in);
    maybe(kv, "ar_only_until", cfg.ar_only_until);
    maybe(kv, "thresholds_zero_until", cfg.thresholds_zero_until);
    maybe(kv, "tune_every", cfg.tune_every);
    maybe(kv, "lambda_l_every", cfg.lambda_l_every);
    maybe(kv, "lambda_a_every", cfg.lambda_a_every);
    maybe(kv, "order", cfg.q);
    maybe(kv, "thinning", cfg.thinning);
    maybe(kv, "single_period", cfg.single_period);
    maybe(kv, "lambda_upper", cfg.lambda_upper);
    maybe(kv, "sigma_d", cfg.sigma_d);
    maybe(kv, "h0", cfg.h0);
    maybe(kv, "mh_band_lo", cfg.mh_band_lo);
    maybe(kv, "mh_band_hi", cfg.mh_band_hi);
    maybe(kv, "mala_band_lo", cfg.mala_band_lo);
    maybe(kv, "mala_band_hi", cfg.mala_band_hi);
    maybe(kv, "seed", cfg.seed);
    return cfg;
}

json chain_config_json(const ChainConfig& c) {
    return json{{"iterations", c.total_iters},
                {"burn_in", c.burn_in},
                {"ar_only_until", c.ar_only_until},
                {"thresholds_zero_until", c.thresholds_zero_until},
                {"tune_every", c.tune_every},
                {"lambda_l_every", c.lambda_l_every},
                {"lambda_a_every", c.lambda_a_every},
                {"order", c.q},
                {"thinning", c.thinning},
                {"single_period", c.single_period},
                {"lambda_upper", c.lambda_upper},
                {"sigma_d", c.sigma_d},
                {"h0", c.h0},
                {"seed", c.seed},
                {"mh_band", {c.mh_band_lo, c.mh_band_hi}},
                {"mala_band", {c.mala_band_lo, c.mala_band_hi}}};
}

/// Every run emits exactly one manifest. Timing varies run to run, so the
/// manifest is the one output excluded from byte-level reproducibility.
void write_manifest(const std::string& output_dir, const std::string& command,
                    const json& config_echo, std::uint64_t seed,
                    const json& inputs, const json& outputs,
                    const json& summary, double elapsed_sec) {
    json manifest{{"command", command},
                  {"config", config_echo},
                  {"seed", seed},
                  {"inputs", inputs},
                  {"outputs", outputs},
                  {"summary", summary},
                  {"elapsed_seconds", elapsed_sec}};
    std::ofstream out(fs::path(output_dir) / "manifest.json");
    if (!out) throw RunError("cannot write manifest in " + output_dir);
    out << manifest.dump(2) << '\n';
}

IngestSpec ingest_spec_from(const std::string& input,
                            const std::string& orientation,
                            const std::string& preprocess, bool header,
                            const std::string& split) {
    IngestSpec spec;
    spec.path = input;
    if (orientation == "rows-are-time")
        spec.orientation = IngestSpec::Orientation::rows_are_time;
    else if (orientation == "rows-are-variables")
        spec.orientation = IngestSpec::Orientation::rows_are_variables;
    else
        throw ValidationError("unknown orientation: " + orientation);
    if (preprocess == "none")
        spec.preprocess = IngestSpec::Preprocess::none;
    else if (preprocess == "log-diff")
        spec.preprocess = IngestSpec::Preprocess::log_diff;
    else
        throw ValidationError("unknown preprocess: " + preprocess);
    spec.header = header;

    if (!split.empty()) {
        if (split.rfind("index:", 0) == 0) {
            spec.split_index = std::stoi(split.substr(6));
        } else if (split.rfind("date:", 0) == 0) {
            // date:COLUMN:start..end:start..end
            const std::string rest = split.substr(5);
            const auto c1 = rest.find(':');
            const auto c2 = rest.find(':', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos)
                throw ValidationError(
                    "date split must be date:COL:start..end:start..end");
            spec.date_column = rest.substr(0, c1);
            auto parse_range = [](const std::string& r, std::string& a,
                                  std::string& b) {
                const auto dots = r.find("..");
                if (dots == std::string::npos)
                    throw ValidationError("range must be start..end: " + r);
                a = r.substr(0, dots);
                b = r.substr(dots + 2);
            };
            parse_range(rest.substr(c1 + 1, c2 - c1 - 1), spec.range1_start,
                        spec.range1_end);
            parse_range(rest.substr(c2 + 1), spec.range2_start,
                        spec.range2_end);
        } else {
            throw ValidationError("split must be index:N or date:...");
        }
    }
    return spec;
}

struct Standardization {
    Eigen::VectorXd mean, sd;
};

Standardization standardize(PairedDataset& ds) {
    const int p = ds.p();
    Standardization st;
    st.mean.resize(p);
    st.sd.resize(p);
    const int n_total = ds.n1() + ds.n2();
    for (int i = 0; i < p; ++i) {
        double m = ds.y1.row(i).sum();
        if (ds.y2.size() > 0) m += ds.y2.row(i).sum();
        m /= n_total;
        double ss = (ds.y1.row(i).array() - m).square().sum();
        if (ds.y2.size() > 0) ss += (ds.y2.row(i).array() - m).square().sum();
        const double sd = std::sqrt(ss / n_total);
        if (!(sd > 0.0))
            throw ValidationError("cannot standardize constant variable " +
                                  std::to_string(i));
        st.mean[i] = m;
        st.sd[i] = sd;
        ds.y1.row(i) = (ds.y1.row(i).array() - m) / sd;
        if (ds.y2.size() > 0) ds.y2.row(i) = (ds.y2.row(i).array() - m) / sd;
    }
    return st;
}

json scenario_json(const ScenarioSpec& s) {
    return json{{"p", s.p},
                {"n", s.n},
                {"n2", s.n2},
                {"q", s.q},
                {"sparsity", s.sparsity},
                {"m1", s.m1},
                {"m2", s.m2},
                {"m3", s.m3},
                {"seed", s.seed},
                {"periods", s.periods},
                {"perturb_count", s.perturb_count},
                {"perturb_magnitude", s.perturb_magnitude},
                {"wishart_df", s.wishart_df},
                {"graph",
                 {{"n_blocks", s.graph.n_blocks},
                  {"nodes_per_block", s.graph.nodes_per_block},
                  {"ring_degree", s.graph.ring_degree},
                  {"rewire_prob", s.graph.rewire_prob}}}};
}

ScenarioSpec scenario_from_json(const json& j) {
    ScenarioSpec s;
    s.p = j.value("p", s.p);
    s.n = j.value("n", s.n);
    s.n2 = j.value("n2", s.n2);
    s.q = j.value("q", s.q);
    s.sparsity = j.value("sparsity", s.sparsity);
    s.m1 = j.value("m1", s.m1);
    s.m2 = j.value("m2", s.m2);
    s.m3 = j.value("m3", s.m3);
    s.seed = j.value("seed", s.seed);
    s.periods = j.value("periods", s.periods);
    s.perturb_count = j.value("perturb_count", s.perturb_count);
    s.perturb_magnitude = j.value("perturb_magnitude", s.perturb_magnitude);
    s.wishart_df = j.value("wishart_df", s.wishart_df);
    if (j.contains("graph")) {
        const auto& g = j["graph"];
        s.graph.n_blocks = g.value("n_blocks", s.graph.n_blocks);
        s.graph.nodes_per_block =
            g.value("nodes_per_block", s.graph.nodes_per_block);
        s.graph.ring_degree = g.value("ring_degree", s.graph.ring_degree);
        s.graph.rewire_prob = g.value("rewire_prob", s.graph.rewire_prob);
    }
    return s;
}

int run_fit(const CommonOpts& common, const std::string& input,
            const std::string& orientation, const std::string& preprocess,
            bool header, const std::string& split, int order_override,
            bool do_standardize, bool text_draws) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto kv = effective_config(common);
    ChainConfig cfg = chain_config_from(kv);
    if (order_override > 0) cfg.q = order_override;
    if (common.seed_set) cfg.seed = common.seed;

    IngestSpec ispec =
        ingest_spec_from(input, orientation, preprocess, header, split);
    PairedDataset ds = ingest(ispec);
    if (ds.single_period()) cfg.single_period = true;
    if (ds.n1() <= cfg.q || (!ds.single_period() && ds.n2() <= cfg.q))
        throw ValidationError("split yields a period with n <= q");

    json scaling = nullptr;
    bool want_standardize = do_standardize;
    maybe(kv, "standardize", want_standardize);
    if (want_standardize) {
        const Standardization st = standardize(ds);
        scaling = json::object();
        for (int i = 0; i < ds.p(); ++i)
            scaling[ds.names[i]] = {{"mean", st.mean[i]}, {"sd", st.sd[i]}};
    }

    fs::create_directories(common.output_dir);
    const fs::path outdir(common.output_dir);
    const std::string draws_path = (outdir / "draws.bin").string();
    const std::string diag_path = (outdir / "diagnostics.ndjson").string();

    std::ofstream diag_out(diag_path);
    if (!diag_out) throw RunError("cannot write " + diag_path);
    DiagSink sink = [&diag_out](const BlockEvent& ev) {
        diag_out << "{\"iter\":" << ev.iter << ",\"block\":\"" << ev.block
                 << "\",\"accepted\":" << (ev.accepted ? "true" : "false")
                 << ",\"log_post\":" << ev.log_post << "}\n";
    };

    RunResult result = run_chain(ds, cfg, sink);
    diag_out.close();

    save_draws(draws_path, result.draws);
    json outputs{{"draws", draws_path}, {"diagnostics", diag_path}};
    if (text_draws) {
        const std::string csv_path = (outdir / "draws.csv").string();
        export_draws_csv(csv_path, result.draws);
        outputs["draws_csv"] = csv_path;
    }

    json accept = json::object();
    for (const auto& [block, t] : result.diag.post_burn_totals)
        accept[block] = t.second > 0
                            ? static_cast<double>(t.first) / t.second
                            : 0.0;
    json summary{{"p", ds.p()},
                 {"n1", ds.n1()},
                 {"n2", ds.n2()},
                 {"stored_draws", result.diag.stored_draws},
                 {"post_burn_acceptance", accept},
                 {"final_log_posterior",
                  result.diag.logpost_trace.empty()
                      ? 0.0
                      : result.diag.logpost_trace.back()},
                 {"standardization", scaling}};
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(common.output_dir, "fit", chain_config_json(cfg), cfg.seed,
                   json{{"input", input}, {"digest", file_digest_hex(input)}},
                   outputs, summary, elapsed);
    std::cout << "fit: " << result.diag.stored_draws << " draws -> "
              << draws_path << "\n";
    return 0;
}

int run_report(const CommonOpts& common, const std::string& draws_path,
               double level, int top_k) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!fs::exists(draws_path))
        throw ValidationError("draws file not found: " + draws_path);
    PosteriorDraws draws = load_draws(draws_path);
    if (draws.single_period)
        throw ValidationError(
            "edge-shift reports need a two-period fit (draws are single-period)");

    const auto diffs = omega_diff_draws(draws);
    const EdgeShiftReport report = classify_edges(diffs, level);
    const auto top = top_k_edges(report, top_k);

    fs::create_directories(common.output_dir);
    const fs::path outdir(common.output_dir);
    const std::string report_path = (outdir / "edge_shifts.json").string();
    const std::string dot_path = (outdir / "edge_shifts.dot").string();
    const std::string top_path = (outdir / "top_edges.csv").string();
    write_report_json(report_path, report, top, draws.names);
    write_dot(dot_path, report, draws.names);
    write_top_k_csv(top_path, top, draws.names);

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(
        common.output_dir, "report",
        json{{"level", level}, {"top_k", top_k}}, 0,
        json{{"draws", draws_path}, {"digest", file_digest_hex(draws_path)}},
        json{{"report", report_path}, {"dot", dot_path}, {"top", top_path}},
        json{{"flagged_edges", report.flagged().size()},
             {"draws_used", draws.count()}},
        elapsed);
    std::cout << "report: " << report.flagged().size() << " flagged edges -> "
              << report_path << "\n";
    return 0;
}

int run_predict(const CommonOpts& common, const std::string& draws_path,
                const std::string& history_path,
                const std::string& orientation, bool header, int horizon,
                bool mean_only, bool keep_paths) {
    const auto t0 = std::chrono::steady_clock::now();
    PosteriorDraws draws = load_draws(draws_path);
    std::vector<std::string> names;
    const Eigen::MatrixXd history = read_matrix_csv(
        history_path,
        orientation == "rows-are-variables"
            ? IngestSpec::Orientation::rows_are_variables
            : IngestSpec::Orientation::rows_are_time,
        header, &names);

    Rng rng(common.seed);
    ForecastResult fc =
        predict(draws, history, horizon, rng, mean_only, keep_paths);

    fs::create_directories(common.output_dir);
    const fs::path outdir(common.output_dir);
    const std::string fc_path = (outdir / "forecast.csv").string();
    write_forecast_csv(fc_path, fc,
                       draws.names.empty() ? names : draws.names);
    json outputs{{"forecast", fc_path}};
    if (keep_paths) {
        const std::string paths_path = (outdir / "forecast_paths.csv").string();
        std::ofstream out(paths_path);
        out << "draw,variable,step,value\n";
        for (std::size_t k = 0; k < fc.paths.size(); ++k)
            for (int i = 0; i < fc.paths[k].rows(); ++i)
                for (int h = 0; h < fc.paths[k].cols(); ++h) {
                    char buf[40];
                    std::snprintf(buf, sizeof(buf), "%.17g",
                                  fc.paths[k](i, h));
                    out << k << ',' << i << ',' << (h + 1) << ',' << buf
                        << '\n';
                }
        outputs["paths"] = paths_path;
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(common.output_dir, "predict",
                   json{{"horizon", horizon}, {"mean_only", mean_only}},
                   common.seed,
                   json{{"draws", draws_path},
                        {"digest", file_digest_hex(draws_path)},
                        {"history", history_path},
                        {"history_digest", file_digest_hex(history_path)}},
                   outputs, json{{"draws_used", draws.count()}}, elapsed);
    std::cout << "predict: horizon " << horizon << " -> " << fc_path << "\n";
    return 0;
}

int run_simulate(const CommonOpts& common, const std::string& spec_path) {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioSpec spec;
    json inputs = json::object();
    if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw ParseError("cannot open scenario spec: " + spec_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& err) {
            throw ParseError("scenario spec is not valid JSON: " +
                             std::string(err.what()));
        }
        spec = scenario_from_json(j);
        inputs = json{{"spec", spec_path},
                      {"digest", file_digest_hex(spec_path)}};
    }
    if (common.seed_set) spec.seed = common.seed;

    Rng rng(spec.seed);
    ScenarioData sim = simulate_scenario(spec, rng);

    fs::create_directories(common.output_dir);
    const fs::path outdir(common.output_dir);
    const std::string y1_path = (outdir / "y1.csv").string();
    write_matrix_csv(y1_path, sim.data.y1, sim.data.names);
    json outputs{{"y1", y1_path}};
    if (sim.data.y2.size() > 0) {
        const std::string y2_path = (outdir / "y2.csv").string();
        write_matrix_csv(y2_path, sim.data.y2, sim.data.names);
        outputs["y2"] = y2_path;
    }
    const std::string omega_path = (outdir / "omega1_true.csv").string();
    write_matrix_csv(omega_path, sim.omega1, {});
    outputs["omega1_true"] = omega_path;
    if (sim.omega2.size() > 0) {
        const std::string omega2_path = (outdir / "omega2_true.csv").string();
        write_matrix_csv(omega2_path, sim.omega2, {});
        outputs["omega2_true"] = omega2_path;
    }
    const std::string pacf_path = (outdir / "pacf_true.csv").string();
    write_matrix_csv(pacf_path, sim.pacf.rho, sim.data.names);
    outputs["pacf_true"] = pacf_path;

    // Scenario echo: parsing this file back reproduces the spec.
    const std::string echo_path = (outdir / "scenario.json").string();
    {
        json echo = scenario_json(spec);
        echo["achieved_sparsity"] = sim.achieved_sparsity;
        echo["orders"] = sim.orders;
        std::ofstream out(echo_path);
        out << echo.dump(2) << '\n';
    }
    outputs["scenario"] = echo_path;

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(common.output_dir, "simulate", scenario_json(spec),
                   spec.seed, inputs, outputs,
                   json{{"achieved_sparsity", sim.achieved_sparsity}},
                   elapsed);
    std::cout << "simulate: p=" << spec.p << " n=" << spec.n << " -> "
              << y1_path << "\n";
    return 0;
}

int run_benchmark_cmd(const CommonOpts& common, const std::string& grid_path,
                      int replications, int workers) {
    const auto t0 = std::chrono::steady_clock::now();
    std::ifstream in(grid_path);
    if (!in) throw ParseError("cannot open benchmark grid: " + grid_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& err) {
        throw ParseError("benchmark grid is not valid JSON: " +
                         std::string(err.what()));
    }
    std::vector<ScenarioSpec> grid;
    for (const auto& cell : j.at("cells")) grid.push_back(scenario_from_json(cell));
    if (j.contains("replications") && replications <= 0)
        replications = j["replications"].get<int>();
    if (replications <= 0) replications = 1;

    const auto kv = effective_config(common);
    ChainConfig cfg = chain_config_from(kv);
    if (common.seed_set)
        for (auto& s : grid) s.seed = Rng::derive(common.seed, s.seed);

    BenchmarkTable table = run_benchmark(grid, replications, cfg, workers);

    fs::create_directories(common.output_dir);
    const fs::path outdir(common.output_dir);
    const std::string table_path = (outdir / "benchmark.json").string();
    const std::string csv_path = (outdir / "benchmark.csv").string();
    {
        json cells = json::array();
        for (const auto& c : table.cells) {
            json cj{{"spec", scenario_json(c.spec)},
                    {"rmse", c.rmse_reps},
                    {"rmse_mean", c.rmse_mean},
                    {"identity_baseline", c.identity_baseline},
                    {"failures", c.failures}};
            if (!c.errors.empty()) cj["errors"] = c.errors;
            cells.push_back(cj);
        }
        std::ofstream out(table_path);
        out << json{{"replications", table.replications}, {"cells", cells}}
                   .dump(2)
            << '\n';
    }
    {
        std::ofstream out(csv_path);
        out << "p,n,q,rmse\n";
        for (const auto& c : table.cells) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.6f", c.rmse_mean);
            out << c.spec.p << ',' << c.spec.n << ',' << c.spec.q << ','
                << buf << '\n';
        }
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(common.output_dir, "benchmark",
                   json{{"replications", replications}, {"workers", workers}},
                   common.seed,
                   json{{"grid", grid_path},
                        {"digest", file_digest_hex(grid_path)}},
                   json{{"table", table_path}, {"csv", csv_path}},
                   json{{"cells", table.cells.size()}}, elapsed);
    std::cout << "benchmark: " << table.cells.size() << " cells -> "
              << table_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Paired-period sparse precision estimation with latent AR series: "
        "simulate, fit, report, predict, benchmark"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--config", common.config_path,
                   "flat key = value configuration file");
    app.add_option("--output-dir", common.output_dir, "output directory");
    auto* seed_opt =
        app.add_option("--seed", common.seed, "random seed override");

    // fit
    auto* fit = app.add_subcommand("fit", "run the sampler on a dataset");
    std::string input, orientation = "rows-are-time", preprocess = "none",
                split;
    bool header = false, do_standardize = false, text_draws = false;
    int order_override = -1;
    fit->add_option("--input", input, "delimited input file")->required();
    fit->add_option("--orientation", orientation,
                    "rows-are-time | rows-are-variables");
    fit->add_option("--preprocess", preprocess, "none | log-diff");
    fit->add_flag("--header", header, "first row/column holds names");
    fit->add_option("--split", split,
                    "index:N or date:COL:start..end:start..end");
    fit->add_option("--order", order_override, "AR order q");
    fit->add_flag("--standardize", do_standardize,
                  "per-variable standardization (recorded in manifest)");
    fit->add_flag("--text-draws", text_draws, "also export draws as CSV");

    // report
    auto* report = app.add_subcommand("report", "edge-shift report from draws");
    std::string draws_path;
    double level = 0.95;
    int top_k = 10;
    report->add_option("--draws", draws_path, "draws container")->required();
    report->add_option("--level", level, "credible level");
    report->add_option("--top-k", top_k, "top edges to list");

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "h-step-ahead forecast");
    std::string history_path, pred_orientation = "rows-are-time";
    int horizon = 1;
    bool pred_header = false, mean_only = false, keep_paths = false;
    predict_cmd->add_option("--draws", draws_path, "draws container")
        ->required();
    predict_cmd->add_option("--history", history_path, "history matrix CSV")
        ->required();
    predict_cmd->add_option("--orientation", pred_orientation,
                            "history orientation");
    predict_cmd->add_flag("--header", pred_header, "history has names");
    predict_cmd->add_option("--horizon", horizon, "steps ahead");
    predict_cmd->add_flag("--mean-only", mean_only,
                          "suppress innovations (conditional mean)");
    predict_cmd->add_flag("--paths", keep_paths, "keep per-draw paths");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate synthetic data");
    std::string scenario_path;
    simulate->add_option("--spec", scenario_path, "scenario JSON file");

    // benchmark
    auto* benchmark =
        app.add_subcommand("benchmark", "RMSE table over a scenario grid");
    std::string grid_path;
    int replications = 0, workers = 1;
    benchmark->add_option("--grid", grid_path, "grid JSON file")->required();
    benchmark->add_option("--replications", replications,
                          "replications per cell");
    benchmark->add_option("--workers", workers, "concurrent grid cells");

    CLI11_PARSE(app, argc, argv);
    common.seed_set = seed_opt->count() > 0;

    try {
        if (*fit)
            return run_fit(common, input, orientation, preprocess, header,
                           split, order_override, do_standardize, text_draws);
        if (*report) return run_report(common, draws_path, level, top_k);
        if (*predict_cmd)
            return run_predict(common, draws_path, history_path,
                               pred_orientation, pred_header, horizon,
                               mean_only, keep_paths);
        if (*simulate) return run_simulate(common, scenario_path);
        if (*benchmark)
            return run_benchmark_cmd(common, grid_path, replications, workers);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return ParseError::exit_code;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return ValidationError::exit_code;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return RunError::exit_code;
    }
    return 0;
}
