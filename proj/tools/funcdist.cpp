// funcdist: config-driven pipelines around the functional-distance library.
//
// Subcommands:
//   simulate-stylized  closed-form linear-economy oracle vs Monte Carlo
//   gen-synthetic      planted distance/deal panels and a synthetic firm panel
//   train              per-(industry, year) network training from a firm panel
//   distances          training plus all ordered pair distances per year
//   regress            regression batteries over counts/deals tables
//   report             distance summary plus the regression suite
//
// All randomness derives from [run] seed through named child seeds, worker
// counts never change output bytes, and every run writes the fully resolved
// configuration next to its outputs.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "funcdist/config.hpp"
#include "funcdist/csv.hpp"
#include "funcdist/distance.hpp"
#include "funcdist/econometrics.hpp"
#include "funcdist/error.hpp"
#include "funcdist/frame.hpp"
#include "funcdist/log.hpp"
#include "funcdist/neural.hpp"
#include "funcdist/numio.hpp"
#include "funcdist/panel.hpp"
#include "funcdist/rng.hpp"
#include "funcdist/stylized.hpp"
#include "funcdist/synthetic.hpp"
#include "funcdist/tables.hpp"

namespace fs = std::filesystem;
using namespace funcdist;

namespace {

struct CommonArgs {
    std::string config_path;
    int workers = 0;          // 0 = keep config value
    std::string out_dir;      // empty = keep config value
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "Run configuration file (INI)")
        ->required();
    sub->add_option("--workers", args.workers, "Worker threads (overrides [run] workers)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", args.out_dir, "Output directory (overrides [run] out)");
    sub->add_option("--seed-override", args.seed, "Root seed (overrides [run] seed)")
        ->each([&args](const std::string&) { args.seed_set = true; });
}

config::RunConfig load_with_overrides(const CommonArgs& args) {
    config::RunConfig cfg = config::load_config(args.config_path);
    if (args.workers > 0) cfg.workers = args.workers;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed_set) {
        cfg.seed = args.seed;
        cfg.train.seed = args.seed;
    }
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) fail_io("write failed for '" + path.string() + "'");
}

// Every run self-documents: outputs plus the configuration that produced them.
fs::path prepare_out(const config::RunConfig& cfg) {
    fs::path out(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) fail_io("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
    write_text(out / "resolved_config.ini", cfg.resolved_text());
    return out;
}

void emit(const std::string& line) { std::fputs((line + "\n").c_str(), stdout); }

// ------------------------------------------------------------------ stylized

int cmd_simulate_stylized(const config::RunConfig& cfg) {
    const fs::path out = prepare_out(cfg);
    const double sigma = cfg.stylized_sigma;
    const auto n = static_cast<std::size_t>(cfg.stylized_n);

    std::map<int, stylized::Samples> samples;
    for (int group : {1, 2, 3})
        samples.emplace(group, stylized::sample_group(group, n, sigma, cfg.seed));

    CsvTable table;
    table.header = {"pair", "mode", "analytic_mse", "empirical_mse",
                    "rel_error", "tolerance", "pass"};
    std::vector<std::string> failures;

    for (int pair : {11, 12, 13}) {
        for (auto mode : {stylized::Mode::Unadjusted, stylized::Mode::Transfer}) {
            const bool transfer = mode == stylized::Mode::Transfer;
            const stylized::LinearWeights w = transfer
                                                  ? stylized::optimal_tf_weights(pair)
                                                  : stylized::baseline_weights();
            const double analytic = stylized::analytic_mse(pair, sigma, mode);
            const double empirical =
                stylized::empirical_mse(w, samples.at(pair % 10), cfg.workers);
            double rel;
            if (analytic == 0.0)
                rel = empirical == 0.0 ? 0.0
                                       : std::numeric_limits<double>::infinity();
            else
                rel = std::abs(empirical - analytic) / analytic;
            const bool pass = rel <= cfg.stylized_tolerance;
            const std::string mode_name = transfer ? "transfer" : "unadjusted";
            table.rows.push_back({format_int(pair), mode_name, format_double(analytic),
                                  format_double(empirical), format_double(rel),
                                  format_double(cfg.stylized_tolerance),
                                  pass ? "1" : "0"});
            emit("pair " + format_int(pair) + " " + mode_name +
                 ": analytic=" + format_double(analytic) +
                 " empirical=" + format_double(empirical) +
                 " rel_error=" + format_double(rel) + (pass ? " PASS" : " FAIL"));
            if (!pass)
                failures.push_back(format_int(pair) + "/" + mode_name +
                                   " rel_error=" + format_double(rel));
        }
    }
    write_csv((out / "stylized_oracle.csv").string(), table);
    if (!failures.empty()) {
        std::string msg = "stylized oracle: " + format_int(failures.size()) +
                          " cell(s) exceeded tolerance " +
                          format_double(cfg.stylized_tolerance) + ":";
        for (const auto& f : failures) msg += " [" + f + "]";
        fail_tolerance(msg);
    }
    return 0;
}

// ----------------------------------------------------------------- synthetic

int cmd_gen_synthetic(const config::RunConfig& cfg) {
    const fs::path out = prepare_out(cfg);

    const auto series = econ::gen_synthetic_distances(cfg.synthetic, cfg.seed);
    write_csv((out / "synthetic_distances.csv").string(), distance::to_csv(series));
    write_text(out / "synthetic_distances.json", distance::to_json(series).dump(2) + "\n");

    const auto panels = econ::generate_synthetic_deals(series, cfg.synthetic, cfg.seed);
    write_csv((out / "counts.csv").string(), panels.counts.to_csv());
    emit("pair-year rows: " + format_int(panels.counts.rows()));
    if (cfg.synthetic.with_deals) {
        write_csv((out / "deals.csv").string(), panels.deals.to_csv());
        emit("deal rows: " + format_int(panels.deals.rows()));
    }
    if (cfg.synthetic_firm_panel) {
        const CsvTable firm = econ::gen_firm_panel(cfg.firm_panel, cfg.seed);
        write_csv((out / "firm_panel.csv").string(), firm);
        emit("firm-year rows: " + format_int(static_cast<long long>(firm.rows.size())));
    }
    return 0;
}

// ------------------------------------------------------------ train/distance

struct YearData {
    int year = 0;
    std::map<int, Dataset> train;
    std::map<int, Dataset> eval;  // same objects as train when no holdout
    std::map<int, neural::TrainResult> results;
    std::map<int, Eigen::Index> n_obs;  // usable rows before the split
};

struct TrainingRun {
    panel::RejectionReport rejections;
    std::vector<std::string> skipped;        // "industry=I year=Y: reason"
    std::vector<YearData> years;             // ascending
};

TrainingRun run_training(const config::RunConfig& cfg) {
    if (cfg.panel_input.empty())
        fail_validation("panel.input is not set; point it at a firm panel CSV");

    panel::LoadOptions lo;
    lo.asset_floor = cfg.asset_floor;
    panel::Panel p = panel::load_firm_panel(cfg.panel_input, cfg.schema, lo);

    TrainingRun run;
    run.rejections = p.rejections;
    log::info("panel: kept " + format_int(p.rejections.kept) + " of " +
              format_int(p.rejections.total_rows) + " rows");

    panel::BuildOptions bo;
    bo.kind = cfg.output;
    bo.min_firms = cfg.min_firms;
    bo.winsor_fraction = cfg.winsor_fraction;

    std::map<int, YearData> by_year;
    for (const auto& [industry, year] : panel::industry_year_keys(p.firms)) {
        try {
            panel::IndustryYearDataset ds =
                panel::build_dataset(p.firms, industry, year, bo);
            YearData& yd = by_year[year];
            yd.year = year;
            yd.n_obs[industry] = ds.data.rows();
            if (cfg.holdout_fraction > 0) {
                const std::uint64_t split_seed =
                    child_seed(cfg.seed, "holdout/year=" + std::to_string(year) +
                                             "/industry=" + std::to_string(industry));
                distance::Split split = distance::split_holdout(
                    ds.data, cfg.holdout_fraction, split_seed);
                yd.train[industry] = std::move(split.train);
                yd.eval[industry] = std::move(split.eval);
            } else {
                yd.train[industry] = std::move(ds.data);
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Validation) throw;
            const std::string reason = "industry=" + std::to_string(industry) +
                                       " year=" + std::to_string(year) + ": " + e.what();
            log::warn("skipping " + reason);
            run.skipped.push_back(reason);
        }
    }
    for (auto& [year, yd] : by_year) {
        yd.results = distance::train_industries(yd.train, cfg.arch, cfg.train, year,
                                                cfg.workers);
        run.years.push_back(std::move(yd));
    }
    return run;
}

void write_training_outputs(const fs::path& out, const TrainingRun& run) {
    write_csv((out / "rejection_report.csv").string(), run.rejections.to_csv());

    CsvTable skips;
    skips.header = {"detail"};
    for (const auto& s : run.skipped) skips.rows.push_back({s});
    write_csv((out / "skipped.csv").string(), skips);

    const fs::path wdir = out / "weights";
    std::error_code ec;
    fs::create_directories(wdir, ec);
    if (ec) fail_io("cannot create '" + wdir.string() + "': " + ec.message());

    CsvTable log;
    log.header = {"year", "industry", "n_obs", "n_train", "rmse", "best_epoch",
                  "epochs_run", "weights_file"};
    for (const auto& yd : run.years) {
        for (const auto& [industry, res] : yd.results) {
            const std::string fname = "y" + std::to_string(yd.year) + "_i" +
                                      std::to_string(industry) + ".json";
            neural::save_weights(res.weights, (wdir / fname).string());
            // Record the path relative to the output directory so the log is
            // usable without knowing the layout convention.
            log.rows.push_back({format_int(yd.year), format_int(industry),
                                format_int(yd.n_obs.at(industry)),
                                format_int(yd.train.at(industry).rows()),
                                format_double(res.rmse), format_int(res.best_epoch),
                                format_int(res.epochs_run), "weights/" + fname});
        }
    }
    write_csv((out / "training_log.csv").string(), log);
}

// Raised only after the rejection and skip tables are on disk, so a run that
// filters everything out still leaves a diagnosable trail.
void require_trained(const TrainingRun& run) {
    if (run.years.empty())
        fail_estimation("no industry-year passed the data requirements (" +
                        format_int(run.skipped.size()) + " skipped)");
}

int cmd_train(const config::RunConfig& cfg) {
    const fs::path out = prepare_out(cfg);
    TrainingRun run = run_training(cfg);
    write_training_outputs(out, run);
    require_trained(run);
    long long trained = 0;
    for (const auto& yd : run.years) trained += static_cast<long long>(yd.results.size());
    emit("trained " + format_int(trained) + " industry-year networks (" +
         format_int(run.skipped.size()) + " skipped)");
    return 0;
}

int cmd_distances(const config::RunConfig& cfg) {
    const fs::path out = prepare_out(cfg);
    TrainingRun run = run_training(cfg);
    write_training_outputs(out, run);
    require_trained(run);

    distance::DistanceConfig dcfg;
    dcfg.retrain = cfg.train;
    dcfg.holdout_fraction = cfg.holdout_fraction;
    dcfg.convention = cfg.convention;
    dcfg.workers = cfg.workers;

    std::vector<distance::DistanceMatrix> series;
    for (const auto& yd : run.years) {
        std::map<int, neural::WeightSet> weights;
        for (const auto& [industry, res] : yd.results) weights.emplace(industry, res.weights);
        // In-sample runs pass the training map on both sides so the self-pair
        // identity sees one dataset object, not two equal copies.
        const auto& eval = cfg.holdout_fraction > 0 ? yd.eval : yd.train;
        series.push_back(distance::all_pairs(yd.year, weights, yd.train, eval, dcfg));
    }

    write_csv((out / "distances.csv").string(), distance::to_csv(series));
    write_text(out / "distances.json", distance::to_json(series).dump(2) + "\n");

    long long pairs = 0;
    for (const auto& mat : series) pairs += static_cast<long long>(mat.records.size());
    emit("distance rows: " + format_int(pairs) + " across " +
         format_int(series.size()) + " year(s)");
    return 0;
}

// ------------------------------------------------------------------- regress

struct Frames {
    std::unique_ptr<econ::DataFrame> counts;
    std::unique_ptr<econ::DataFrame> deals;
};

Frames load_frames(const config::RunConfig& cfg, bool counts_required) {
    Frames f;
    if (!cfg.counts_path.empty()) {
        f.counts = std::make_unique<econ::DataFrame>(
            econ::DataFrame::from_csv(read_csv(cfg.counts_path), cfg.counts_path));
    } else if (counts_required) {
        fail_validation("regress.counts is not set; point it at a pair-year CSV");
    }
    if (!cfg.deals_path.empty()) {
        try {
            f.deals = std::make_unique<econ::DataFrame>(
                econ::DataFrame::from_csv(read_csv(cfg.deals_path), cfg.deals_path));
        } catch (const std::exception& e) {
            // Deal batteries get tagged failures; distance-side specs proceed.
            log::warn(std::string("deals table unavailable: ") + e.what());
        }
    }
    if (f.counts && f.counts->has("log_d_u") && f.counts->has("log_d_tf") &&
        !f.counts->has("tf_resid")) {
        try {
            econ::augment_transfer_columns(*f.counts);
        } catch (const std::exception& e) {
            log::warn(std::string("transfer-channel columns unavailable: ") + e.what());
        }
    }
    return f;
}

int run_report_suite(const config::RunConfig& cfg, const Frames& f, const fs::path& out,
                     std::string prefix_text) {
    const auto items =
        econ::build_table_pipeline(f.counts.get(), f.deals.get(), cfg.batteries);
    const econ::Report report =
        econ::run_pipeline(f.counts.get(), f.deals.get(), items, cfg.workers);

    write_csv((out / "report.csv").string(), econ::report_to_csv(report));
    write_text(out / "report.json", econ::report_to_json(report).dump(2) + "\n");
    const std::string text = prefix_text + econ::report_to_text(report);
    write_text(out / "report.txt", text);
    std::fputs(text.c_str(), stdout);

    long long ok = 0;
    for (const auto& e : report.entries) {
        if (e.ok)
            ++ok;
        else
            log::warn("spec '" + e.item.spec.label + "' failed: " + e.error);
    }
    emit("estimated " + format_int(ok) + " of " + format_int(report.entries.size()) +
         " specifications");
    if (!report.entries.empty() && ok == 0)
        fail_estimation("all " + format_int(report.entries.size()) +
                        " specifications failed; first: " + report.entries.front().error);
    return 0;
}

int cmd_regress(const config::RunConfig& cfg) {
    const fs::path out = prepare_out(cfg);
    Frames f = load_frames(cfg, /*counts_required=*/true);
    return run_report_suite(cfg, f, out, "");
}

// -------------------------------------------------------------------- report

int cmd_report(const config::RunConfig& cfg) {
    const fs::path out = prepare_out(cfg);
    if (cfg.distances_path.empty())
        fail_validation("report.distances is not set; point it at a distances CSV");
    const auto series = distance::series_from_csv(read_csv(cfg.distances_path));

    CsvTable summary;
    summary.header = {"year",       "pairs",      "cross_pairs",  "mean_d_u",
                      "mean_d_tf",  "min_d_u",    "max_d_u",      "min_d_tf",
                      "max_d_tf",   "share_tf_le_u"};
    // Name the source by filename only: the full path is already recorded in
    // resolved_config.ini, and data outputs must not depend on where a run
    // happens to live on disk.
    std::string text = "Functional distance summary (" +
                       fs::path(cfg.distances_path).filename().string() + ")\n";
    text += "Cross-pair means exclude self pairs; share_tf_le_u counts pairs with\n";
    text += "transfer distance at or below the unadjusted distance.\n\n";

    double all_du = 0, all_dtf = 0;
    long long all_cross = 0, all_pairs_n = 0, all_dom = 0;
    for (const auto& mat : series) {
        double du = 0, dtf = 0;
        double min_u = std::numeric_limits<double>::infinity(), max_u = -min_u;
        double min_t = min_u, max_t = -min_u;
        long long cross = 0, dom = 0;
        for (const auto& r : mat.records) {
            if (r.d_tf <= r.d_u + 1e-12) ++dom;
            if (r.acq_industry == r.tgt_industry) continue;
            ++cross;
            du += r.d_u;
            dtf += r.d_tf;
            min_u = std::min(min_u, r.d_u);
            max_u = std::max(max_u, r.d_u);
            min_t = std::min(min_t, r.d_tf);
            max_t = std::max(max_t, r.d_tf);
        }
        const auto n = static_cast<long long>(mat.records.size());
        all_pairs_n += n;
        all_cross += cross;
        all_du += du;
        all_dtf += dtf;
        all_dom += dom;
        const double mu = cross ? du / static_cast<double>(cross) : 1.0;
        const double mt = cross ? dtf / static_cast<double>(cross) : 1.0;
        summary.rows.push_back(
            {format_int(mat.year), format_int(n), format_int(cross), format_double(mu),
             format_double(mt), format_double(cross ? min_u : 1.0),
             format_double(cross ? max_u : 1.0), format_double(cross ? min_t : 1.0),
             format_double(cross ? max_t : 1.0),
             format_double(n ? static_cast<double>(dom) / static_cast<double>(n) : 1.0)});
        text += "year " + format_int(mat.year) + ": mean d_U=" + format_double_fixed(mu, 4) +
                " mean d_TF=" + format_double_fixed(mt, 4) + " over " + format_int(cross) +
                " cross pairs\n";
    }
    const double gmu = all_cross ? all_du / static_cast<double>(all_cross) : 1.0;
    const double gmt = all_cross ? all_dtf / static_cast<double>(all_cross) : 1.0;
    text += "overall: mean d_U=" + format_double_fixed(gmu, 4) +
            " mean d_TF=" + format_double_fixed(gmt, 4) + ", dominance holds on " +
            format_int(all_dom) + "/" + format_int(all_pairs_n) + " pairs\n\n";
    write_csv((out / "distance_summary.csv").string(), summary);

    Frames f = load_frames(cfg, /*counts_required=*/false);
    if (f.counts) return run_report_suite(cfg, f, out, text);

    write_text(out / "report.txt", text);
    std::fputs(text.c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"functional distances between industry production functions"};
    app.require_subcommand(1);

    CommonArgs args;
    int (*handler)(const config::RunConfig&) = nullptr;

    struct Sub {
        const char* name;
        const char* desc;
        int (*fn)(const config::RunConfig&);
    };
    const Sub subs[] = {
        {"simulate-stylized", "Run the closed-form linear-economy oracle",
         &cmd_simulate_stylized},
        {"gen-synthetic", "Generate planted synthetic panels", &cmd_gen_synthetic},
        {"train", "Train per-(industry, year) production networks", &cmd_train},
        {"distances", "Train networks and compute all pair distances", &cmd_distances},
        {"regress", "Run the regression batteries", &cmd_regress},
        {"report", "Summarize distances and run the regression suite", &cmd_report},
    };
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.desc);
        add_common(sub, args);
        sub->callback([&handler, fn = s.fn] { handler = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage problems are validation failures
    }

    try {
        const config::RunConfig cfg = load_with_overrides(args);
        return handler(cfg);
    } catch (const Error& e) {
        log::error(e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        log::error(std::string("unexpected: ") + e.what());
        return 2;
    }
}
