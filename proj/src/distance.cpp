#include "funcdist/distance.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "funcdist/error.hpp"
#include "funcdist/numio.hpp"
#include "funcdist/parallel.hpp"
#include "funcdist/rng.hpp"

namespace funcdist::distance {

namespace {

const char* convention_name(Convention c) {
    return c == Convention::Rmse ? "rmse" : "mse";
}

double apply_convention(double rmse_ratio, Convention c) {
    return c == Convention::Rmse ? rmse_ratio : rmse_ratio * rmse_ratio;
}

double own_rmse_checked(const neural::WeightSet& tgt, const Dataset& eval, int workers,
                        const std::string& context) {
    const double own = neural::rmse(tgt, eval.X, eval.y, workers);
    if (!(own > 0))
        fail_estimation(context + ": degenerate own fit (rmse 0), distance undefined");
    return own;
}

}  // namespace

double unadjusted_distance(const neural::WeightSet& acq, const neural::WeightSet& tgt,
                           const Dataset& tgt_eval, int workers) {
    const double own = own_rmse_checked(tgt, tgt_eval, workers, "unadjusted_distance");
    const double cross = neural::rmse(acq, tgt_eval.X, tgt_eval.y, workers);
    return cross / own;
}

PairResult compute_pair(const neural::WeightSet& acq, const neural::WeightSet& tgt,
                        const Dataset& tgt_train, const Dataset& tgt_eval,
                        const neural::TrainConfig& retrain_cfg, int workers) {
    PairResult r;
    r.rmse_own = own_rmse_checked(tgt, tgt_eval, workers, "compute_pair");
    r.rmse_cross = neural::rmse(acq, tgt_eval.X, tgt_eval.y, workers);

    const bool in_sample = &tgt_train == &tgt_eval;
    if (in_sample && acq.same_values(tgt)) {
        r.rmse_tf = r.rmse_own;
        return r;
    }

    neural::TrainResult retrained =
        neural::train_last_layer(acq, tgt_train.X, tgt_train.y, retrain_cfg);
    if (in_sample) {
        // train_last_layer's best-so-far RMSE is evaluated through the same
        // per-row path as rmse_cross, so rmse_tf <= rmse_cross holds exactly.
        r.rmse_tf = retrained.rmse;
    } else {
        r.rmse_tf = neural::rmse(retrained.weights, tgt_eval.X, tgt_eval.y, workers);
    }
    return r;
}

Split split_holdout(const Dataset& ds, double fraction, std::uint64_t seed) {
    if (fraction < 0 || fraction >= 1)
        fail_validation("holdout fraction must lie in [0, 1)");
    Split out;
    if (fraction == 0) {
        out.train = ds;
        out.eval = ds;
        return out;
    }
    const Eigen::Index n = ds.rows();
    std::vector<int> order(static_cast<size_t>(n));
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(child_seed(seed, "distance/holdout"));
    rng.shuffle(order);

    const auto ntrain = static_cast<Eigen::Index>(
        std::ceil((1.0 - fraction) * static_cast<double>(n)));
    if (ntrain < 1 || ntrain >= n)
        fail_validation("holdout split leaves an empty train or eval part");

    auto take = [&](Eigen::Index begin, Eigen::Index count) {
        Dataset part;
        part.X.resize(count, ds.X.cols());
        part.y.resize(count);
        for (Eigen::Index i = 0; i < count; ++i) {
            part.X.row(i) = ds.X.row(order[static_cast<size_t>(begin + i)]);
            part.y(i) = ds.y(order[static_cast<size_t>(begin + i)]);
        }
        return part;
    };
    out.train = take(0, ntrain);
    out.eval = take(ntrain, n - ntrain);
    return out;
}

std::map<int, neural::TrainResult> train_industries(
    const std::map<int, Dataset>& train_data, const neural::Architecture& arch,
    const neural::TrainConfig& base_cfg, int year, int workers) {
    std::vector<int> ids;
    for (const auto& [id, ds] : train_data) ids.push_back(id);

    std::vector<neural::TrainResult> results(ids.size());
    parallel_jobs(ids.size(), workers, [&](std::size_t j) {
        const int id = ids[j];
        neural::TrainConfig cfg = base_cfg;
        cfg.seed = child_seed(base_cfg.seed, "train/industry=" + format_int(id) +
                                                 "/year=" + format_int(year));
        const Dataset& ds = train_data.at(id);
        results[j] = neural::train(ds.X, ds.y, arch, cfg);
    });

    std::map<int, neural::TrainResult> out;
    for (std::size_t j = 0; j < ids.size(); ++j) out[ids[j]] = std::move(results[j]);
    return out;
}

DistanceMatrix all_pairs(int year, const std::map<int, neural::WeightSet>& weights,
                         const std::map<int, Dataset>& train_data,
                         const std::map<int, Dataset>& eval_data,
                         const DistanceConfig& cfg) {
    if (weights.empty()) fail_validation("all_pairs: no industries");
    std::vector<int> ids;
    for (const auto& [id, ws] : weights) ids.push_back(id);
    for (int id : ids) {
        if (!train_data.count(id) || !eval_data.count(id))
            fail_validation("all_pairs: missing dataset for industry " + format_int(id));
    }

    const auto m = ids.size();
    DistanceMatrix mat;
    mat.year = year;
    mat.convention = cfg.convention;
    mat.industries = ids;
    mat.d_u.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    mat.d_tf.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    mat.records.resize(m * m);

    parallel_jobs(m * m, cfg.workers, [&](std::size_t job) {
        const std::size_t a = job / m;
        const std::size_t t = job % m;
        const int acq_id = ids[a];
        const int tgt_id = ids[t];
        try {
            neural::TrainConfig rcfg = cfg.retrain;
            rcfg.seed = child_seed(cfg.retrain.seed,
                                   "tf/year=" + format_int(year) + "/acq=" +
                                       format_int(acq_id) + "/tgt=" + format_int(tgt_id));
            PairResult pr =
                compute_pair(weights.at(acq_id), weights.at(tgt_id), train_data.at(tgt_id),
                             eval_data.at(tgt_id), rcfg, 1);

            DistanceRecord rec;
            rec.year = year;
            rec.acq_industry = acq_id;
            rec.tgt_industry = tgt_id;
            rec.rmse_cross = pr.rmse_cross;
            rec.rmse_tf = pr.rmse_tf;
            rec.rmse_own = pr.rmse_own;
            rec.d_u = apply_convention(pr.rmse_cross / pr.rmse_own, cfg.convention);
            rec.d_tf = apply_convention(pr.rmse_tf / pr.rmse_own, cfg.convention);
            rec.log_d_u = std::log(rec.d_u);
            rec.log_d_tf = std::log(rec.d_tf);
            mat.records[job] = rec;
            mat.d_u(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(t)) = rec.d_u;
            mat.d_tf(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(t)) = rec.d_tf;
        } catch (const Error& e) {
            throw Error(e.kind(), "pair (" + format_int(acq_id) + " -> " +
                                      format_int(tgt_id) + ") year " + format_int(year) +
                                      ": " + e.what());
        }
    });
    return mat;
}

CsvTable to_csv(const std::vector<DistanceMatrix>& series) {
    CsvTable t;
    t.header = {"year",     "acq_industry", "tgt_industry", "d_u",      "d_tf",
                "log_d_u",  "log_d_tf",     "rmse_cross",   "rmse_tf",  "rmse_own"};
    for (const auto& mat : series) {
        for (const auto& r : mat.records) {
            t.rows.push_back({
                format_int(r.year),
                format_int(r.acq_industry),
                format_int(r.tgt_industry),
                format_double(r.d_u),
                format_double(r.d_tf),
                format_double(r.log_d_u),
                format_double(r.log_d_tf),
                format_double(r.rmse_cross),
                format_double(r.rmse_tf),
                format_double(r.rmse_own),
            });
        }
    }
    return t;
}

nlohmann::json to_json(const std::vector<DistanceMatrix>& series) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& mat : series) {
        nlohmann::json grid_u = nlohmann::json::array();
        nlohmann::json grid_tf = nlohmann::json::array();
        const auto m = static_cast<Eigen::Index>(mat.industries.size());
        for (Eigen::Index a = 0; a < m; ++a) {
            nlohmann::json row_u = nlohmann::json::array();
            nlohmann::json row_tf = nlohmann::json::array();
            for (Eigen::Index t = 0; t < m; ++t) {
                row_u.push_back(mat.d_u(a, t));
                row_tf.push_back(mat.d_tf(a, t));
            }
            grid_u.push_back(std::move(row_u));
            grid_tf.push_back(std::move(row_tf));
        }
        out.push_back({
            {"year", mat.year},
            {"convention", convention_name(mat.convention)},
            {"industries", mat.industries},
            {"d_u", std::move(grid_u)},
            {"d_tf", std::move(grid_tf)},
        });
    }
    return out;
}

std::vector<DistanceMatrix> series_from_csv(const CsvTable& table) {
    const std::string ctx = "distance table";
    const int c_year = table.require("year", ctx);
    const int c_acq = table.require("acq_industry", ctx);
    const int c_tgt = table.require("tgt_industry", ctx);
    const int c_du = table.require("d_u", ctx);
    const int c_dtf = table.require("d_tf", ctx);
    const int c_ldu = table.require("log_d_u", ctx);
    const int c_ldtf = table.require("log_d_tf", ctx);
    const int c_rx = table.require("rmse_cross", ctx);
    const int c_rt = table.require("rmse_tf", ctx);
    const int c_ro = table.require("rmse_own", ctx);

    std::map<int, std::vector<DistanceRecord>> by_year;
    for (const auto& row : table.rows) {
        DistanceRecord r;
        auto cell = [&row](int c) { return row[static_cast<std::size_t>(c)]; };
        r.year = static_cast<int>(parse_int(cell(c_year), ctx));
        r.acq_industry = static_cast<int>(parse_int(cell(c_acq), ctx));
        r.tgt_industry = static_cast<int>(parse_int(cell(c_tgt), ctx));
        r.d_u = parse_double(cell(c_du), ctx);
        r.d_tf = parse_double(cell(c_dtf), ctx);
        r.log_d_u = parse_double(cell(c_ldu), ctx);
        r.log_d_tf = parse_double(cell(c_ldtf), ctx);
        r.rmse_cross = parse_double(cell(c_rx), ctx);
        r.rmse_tf = parse_double(cell(c_rt), ctx);
        r.rmse_own = parse_double(cell(c_ro), ctx);
        by_year[r.year].push_back(r);
    }

    std::vector<DistanceMatrix> series;
    for (auto& [year, records] : by_year) {
        DistanceMatrix mat;
        mat.year = year;
        std::set<int> ids;
        for (const auto& r : records) {
            ids.insert(r.acq_industry);
            ids.insert(r.tgt_industry);
        }
        mat.industries.assign(ids.begin(), ids.end());
        std::map<int, Eigen::Index> pos;
        for (std::size_t i = 0; i < mat.industries.size(); ++i)
            pos[mat.industries[i]] = static_cast<Eigen::Index>(i);
        const auto m = static_cast<Eigen::Index>(mat.industries.size());
        mat.d_u.setOnes(m, m);
        mat.d_tf.setOnes(m, m);
        for (const auto& r : records) {
            mat.d_u(pos[r.acq_industry], pos[r.tgt_industry]) = r.d_u;
            mat.d_tf(pos[r.acq_industry], pos[r.tgt_industry]) = r.d_tf;
        }
        mat.records = std::move(records);
        series.push_back(std::move(mat));
    }
    return series;
}

}  // namespace funcdist::distance
