#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "funcdist/csv.hpp"
#include "funcdist/dataset.hpp"
#include "funcdist/neural.hpp"

namespace funcdist::distance {

// How ratios are reported: Rmse keeps the square-root convention, Mse squares
// it. Stored rmse_* fields are always root mean squared errors.
enum class Convention { Rmse, Mse };

struct DistanceConfig {
    neural::TrainConfig retrain;      // last-layer retraining settings
    double holdout_fraction = 0.0;    // 0 = in-sample evaluation
    Convention convention = Convention::Rmse;
    int workers = 1;
};

struct DistanceRecord {
    int year = 0;
    int acq_industry = 0;
    int tgt_industry = 0;
    double d_u = 0;       // cross error over target's own error
    double d_tf = 0;      // error after output-layer retraining over own error
    double log_d_u = 0;
    double log_d_tf = 0;
    double rmse_cross = 0;
    double rmse_tf = 0;
    double rmse_own = 0;
};

struct DistanceMatrix {
    int year = 0;
    Convention convention = Convention::Rmse;
    std::vector<int> industries;        // sorted ids
    Eigen::MatrixXd d_u;                // [acq][tgt]
    Eigen::MatrixXd d_tf;
    std::vector<DistanceRecord> records;  // row-major (acq, tgt) order
};

// Ratio of the acquiror network's RMSE on the target's data over the target
// network's own RMSE (both on tgt_eval). Throws on a degenerate (zero) own
// fit.
double unadjusted_distance(const neural::WeightSet& acq, const neural::WeightSet& tgt,
                           const Dataset& tgt_eval, int workers = 1);

struct PairResult {
    double rmse_cross = 0;
    double rmse_tf = 0;
    double rmse_own = 0;
};

// Full pair evaluation: cross error, retrained-output-layer error, own error.
// tgt_train drives the retraining; tgt_eval the reported errors. When the two
// weight sets are bitwise identical and tgt_train is tgt_eval (in-sample),
// retraining is skipped: starting at the optimum cannot improve, so the
// transfer error is the own error by identity.
PairResult compute_pair(const neural::WeightSet& acq, const neural::WeightSet& tgt,
                        const Dataset& tgt_train, const Dataset& tgt_eval,
                        const neural::TrainConfig& retrain_cfg, int workers = 1);

// Deterministic holdout split: rows shuffled by seed, first ceil((1-f)*n)
// rows train, remainder evaluates. f = 0 returns the input as both parts.
struct Split {
    Dataset train;
    Dataset eval;
};
Split split_holdout(const Dataset& ds, double fraction, std::uint64_t seed);

// Trains one network per industry (deterministic child seed per industry and
// year); jobs may run in parallel, results land in industry order.
std::map<int, neural::TrainResult> train_industries(
    const std::map<int, Dataset>& train_data, const neural::Architecture& arch,
    const neural::TrainConfig& base_cfg, int year, int workers);

// All ordered pairs for one year. Weight and dataset maps must share keys.
DistanceMatrix all_pairs(int year, const std::map<int, neural::WeightSet>& weights,
                         const std::map<int, Dataset>& train_data,
                         const std::map<int, Dataset>& eval_data,
                         const DistanceConfig& cfg);

// Long-form CSV over a series of per-year matrices, and JSON grids.
CsvTable to_csv(const std::vector<DistanceMatrix>& series);
nlohmann::json to_json(const std::vector<DistanceMatrix>& series);

// Inverse of to_csv: rebuilds the per-year matrices (records in file order,
// grids populated from the records; pairs absent from the file stay at 1).
std::vector<DistanceMatrix> series_from_csv(const CsvTable& table);

}  // namespace funcdist::distance
