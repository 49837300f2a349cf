// Distance pipeline: pair evaluation identities, the transfer-dominance
// guarantee, holdout splitting, and serialization.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "funcdist/distance.hpp"
#include "funcdist/error.hpp"
#include "funcdist/neural.hpp"
#include "funcdist/rng.hpp"
#include "funcdist/stylized.hpp"

using namespace funcdist;
using neural::Architecture;
using neural::TrainConfig;

namespace {

// Small per-"industry" datasets with genuinely different targets.
std::map<int, Dataset> toy_industries(int n, std::uint64_t seed) {
    std::map<int, Dataset> out;
    Rng r(seed);
    for (int ind : {1, 2, 3}) {
        Dataset d;
        d.X.resize(n, 8);
        d.y.resize(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < 8; ++j) d.X(i, j) = r.uniform(-1.0, 1.0);
            const double base = ind == 1   ? d.X(i, 0)
                                : ind == 2 ? -d.X(i, 0)
                                           : d.X(i, 1);
            d.y(i) = base + 0.05 * r.normal();
        }
        out[ind] = std::move(d);
    }
    return out;
}

TrainConfig quick_cfg(std::uint64_t seed, int epochs = 150) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.epochs = epochs;
    cfg.patience = epochs;
    return cfg;
}

}  // namespace

TEST_CASE("self pairs are exactly one in sample and transfer never hurts") {
    const auto data = toy_industries(120, 5);
    const auto results =
        distance::train_industries(data, Architecture::default_arch(), quick_cfg(3), 2000, 2);
    std::map<int, neural::WeightSet> weights;
    for (const auto& [ind, res] : results) weights[ind] = res.weights;

    distance::DistanceConfig cfg;
    cfg.retrain = quick_cfg(3);
    cfg.workers = 2;
    const auto m = distance::all_pairs(2000, weights, data, data, cfg);

    REQUIRE(m.industries == std::vector<int>{1, 2, 3});
    REQUIRE(m.records.size() == 9);
    for (int i = 0; i < 3; ++i) {
        CHECK(m.d_u(i, i) == 1.0);   // exact: same reduction, same bytes
        CHECK(m.d_tf(i, i) == 1.0);
    }
    for (const auto& rec : m.records) {
        CHECK(rec.d_tf <= rec.d_u + 1e-12);
        CHECK(rec.d_u > 0.0);
        CHECK(rec.log_d_u == std::log(rec.d_u));
        CHECK(rec.log_d_tf == std::log(rec.d_tf));
        if (rec.acq_industry != rec.tgt_industry) CHECK(rec.d_u > 1.0);
    }

    // Asymmetry: the grid is not its own transpose for these targets.
    bool asym = false;
    for (int i = 0; i < 3 && !asym; ++i)
        for (int j = 0; j < 3; ++j)
            if (m.d_u(i, j) != m.d_u(j, i)) {
                asym = true;
                break;
            }
    CHECK(asym);
}

TEST_CASE("opposite-sign industries are far apart, transfer repairs them") {
    // Targets x0 and -x0 share features exactly, so output-layer retraining
    // can flip the sign: d_tf collapses toward 1 while d_u stays large.
    const auto data = toy_industries(200, 11);
    const auto results =
        distance::train_industries(data, Architecture::default_arch(),
                                   quick_cfg(7, 400), 2000, 2);
    std::map<int, neural::WeightSet> weights;
    for (const auto& [ind, res] : results) weights[ind] = res.weights;

    distance::DistanceConfig cfg;
    cfg.retrain = quick_cfg(7, 400);
    const auto m = distance::all_pairs(2000, weights, data, data, cfg);
    const auto at = [&](int a, int t) -> const distance::DistanceRecord& {
        return m.records[static_cast<size_t>((a - 1) * 3 + (t - 1))];
    };
    CHECK(at(1, 2).d_u > 3.0);
    CHECK(at(1, 2).d_tf < at(1, 2).d_u * 0.6);
}

TEST_CASE("mse convention squares the rmse ratios") {
    const auto data = toy_industries(100, 21);
    const auto results =
        distance::train_industries(data, Architecture::default_arch(), quick_cfg(9), 1999, 1);
    std::map<int, neural::WeightSet> weights;
    for (const auto& [ind, res] : results) weights[ind] = res.weights;

    distance::DistanceConfig rmse_cfg, mse_cfg;
    rmse_cfg.retrain = mse_cfg.retrain = quick_cfg(9);
    mse_cfg.convention = distance::Convention::Mse;
    const auto a = distance::all_pairs(1999, weights, data, data, rmse_cfg);
    const auto b = distance::all_pairs(1999, weights, data, data, mse_cfg);
    for (size_t k = 0; k < a.records.size(); ++k) {
        CHECK(b.records[k].d_u == a.records[k].d_u * a.records[k].d_u);
        CHECK(b.records[k].rmse_cross == a.records[k].rmse_cross);  // raw errors unchanged
    }
}

TEST_CASE("results are identical across worker counts") {
    const auto data = toy_industries(150, 31);
    distance::DistanceConfig c1, c4;
    c1.retrain = c4.retrain = quick_cfg(13);
    c1.workers = 1;
    c4.workers = 4;

    const auto r1 =
        distance::train_industries(data, Architecture::default_arch(), quick_cfg(13), 2010, 1);
    const auto r4 =
        distance::train_industries(data, Architecture::default_arch(), quick_cfg(13), 2010, 4);
    REQUIRE(r1.size() == r4.size());
    for (const auto& [ind, res] : r1) {
        CHECK(res.weights.same_values(r4.at(ind).weights));
        CHECK(res.rmse == r4.at(ind).rmse);
    }

    std::map<int, neural::WeightSet> weights;
    for (const auto& [ind, res] : r1) weights[ind] = res.weights;
    const auto m1 = distance::all_pairs(2010, weights, data, data, c1);
    const auto m4 = distance::all_pairs(2010, weights, data, data, c4);
    for (size_t k = 0; k < m1.records.size(); ++k) {
        CHECK(m1.records[k].d_u == m4.records[k].d_u);
        CHECK(m1.records[k].d_tf == m4.records[k].d_tf);
    }
}

TEST_CASE("per-industry training seeds are independent of map contents") {
    // Industry 2's network must not change when industry 3 joins the map.
    auto data = toy_industries(100, 41);
    std::map<int, Dataset> partial{{1, data.at(1)}, {2, data.at(2)}};
    const auto full =
        distance::train_industries(data, Architecture::default_arch(), quick_cfg(17), 2005, 2);
    const auto part =
        distance::train_industries(partial, Architecture::default_arch(), quick_cfg(17), 2005, 2);
    CHECK(full.at(2).weights.same_values(part.at(2).weights));

    // ... and changes across years for the same industry.
    const auto other =
        distance::train_industries(partial, Architecture::default_arch(), quick_cfg(17), 2006, 2);
    CHECK_FALSE(other.at(2).weights.same_values(part.at(2).weights));
}

TEST_CASE("holdout split partitions rows deterministically") {
    Dataset ds;
    const int n = 103;
    ds.X.resize(n, 8);
    ds.y.resize(n);
    for (int i = 0; i < n; ++i) {
        ds.y(i) = i;  // row identity rides along in the target
        for (int j = 0; j < 8; ++j) ds.X(i, j) = i * 10.0 + j;
    }

    const auto s = distance::split_holdout(ds, 0.25, 99);
    const auto expected_train = static_cast<Eigen::Index>(
        std::ceil(0.75 * n));
    CHECK(s.train.rows() == expected_train);
    CHECK(s.eval.rows() == n - expected_train);

    std::set<int> seen;
    for (int i = 0; i < s.train.rows(); ++i) seen.insert(static_cast<int>(s.train.y(i)));
    for (int i = 0; i < s.eval.rows(); ++i) {
        const int id = static_cast<int>(s.eval.y(i));
        CHECK(seen.count(id) == 0);  // disjoint
        seen.insert(id);
    }
    CHECK(seen.size() == static_cast<size_t>(n));  // exhaustive

    // Rows travel with their features.
    for (int i = 0; i < s.train.rows(); ++i)
        CHECK(s.train.X(i, 3) == s.train.y(i) * 10.0 + 3);

    const auto again = distance::split_holdout(ds, 0.25, 99);
    CHECK(again.train.y == s.train.y);
    const auto other = distance::split_holdout(ds, 0.25, 100);
    CHECK(other.train.y != s.train.y);

    // Fraction zero: everything is both train and eval.
    const auto whole = distance::split_holdout(ds, 0.0, 99);
    CHECK(whole.train.rows() == n);
    CHECK(whole.eval.rows() == n);
    CHECK(whole.train.y == ds.y);
}

TEST_CASE("degenerate own fit is an estimation failure") {
    Dataset ds;
    ds.X = Eigen::MatrixXd::Zero(50, 8);
    ds.y = Eigen::VectorXd::Zero(50);
    neural::WeightSet tgt = neural::init_network(Architecture::default_arch(), 1);
    // Zero output layer makes the own predictions and targets all zero.
    tgt.W.back().setZero();
    tgt.b.back().setZero();
    const neural::WeightSet acq = neural::init_network(Architecture::default_arch(), 2);
    try {
        (void)distance::unadjusted_distance(acq, tgt, ds);
        FAIL("expected estimation failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Estimation);
    }
}

TEST_CASE("csv round trip preserves every record bitwise") {
    const auto data = toy_industries(90, 51);
    const auto results =
        distance::train_industries(data, Architecture::default_arch(), quick_cfg(19), 2001, 2);
    std::map<int, neural::WeightSet> weights;
    for (const auto& [ind, res] : results) weights[ind] = res.weights;
    distance::DistanceConfig cfg;
    cfg.retrain = quick_cfg(19);

    std::vector<distance::DistanceMatrix> series;
    series.push_back(distance::all_pairs(2001, weights, data, data, cfg));
    series.push_back(distance::all_pairs(2002, weights, data, data, cfg));

    const CsvTable t = distance::to_csv(series);
    CHECK(t.rows.size() == 18);
    const auto back = distance::series_from_csv(t);
    REQUIRE(back.size() == 2);
    for (size_t s = 0; s < 2; ++s) {
        CHECK(back[s].year == series[s].year);
        CHECK(back[s].industries == series[s].industries);
        REQUIRE(back[s].records.size() == series[s].records.size());
        for (size_t k = 0; k < series[s].records.size(); ++k) {
            const auto& a = series[s].records[k];
            const auto& b = back[s].records[k];
            CHECK(b.d_u == a.d_u);
            CHECK(b.d_tf == a.d_tf);
            CHECK(b.log_d_u == a.log_d_u);
            CHECK(b.rmse_cross == a.rmse_cross);
            CHECK(b.rmse_own == a.rmse_own);
        }
        CHECK(back[s].d_u == series[s].d_u);
        CHECK(back[s].d_tf == series[s].d_tf);
    }

    CsvTable missing = t;
    missing.header[0] = "yr";
    CHECK_THROWS_AS((void)distance::series_from_csv(missing), Error);
}

TEST_CASE("stylized economy distances approach the closed forms") {
    // sigma = 0.5 keeps training easy; n large enough for tight ratios.
    const double sigma = 0.5;
    std::map<int, Dataset> data;
    for (int g : {1, 2, 3})
        data[g] = stylized::to_dataset(stylized::sample_group(g, 4000, sigma, 23));

    TrainConfig cfg = quick_cfg(29, 500);
    const auto results =
        distance::train_industries(data, Architecture::default_arch(), cfg, 1, 2);
    std::map<int, neural::WeightSet> weights;
    for (const auto& [ind, res] : results) weights[ind] = res.weights;

    distance::DistanceConfig dc;
    dc.retrain = cfg;
    dc.workers = 2;
    const auto m = distance::all_pairs(1, weights, data, data, dc);
    const auto at = [&](int a, int t) -> const distance::DistanceRecord& {
        return m.records[static_cast<size_t>((a - 1) * 3 + (t - 1))];
    };

    using stylized::Mode;
    const auto ratio_u = [&](int pair) {
        return std::sqrt(stylized::analytic_mse(pair, sigma, Mode::Unadjusted) /
                         (sigma * sigma));
    };
    // Nets only approximate the linear optima; 15% relative slack.
    CHECK(at(1, 2).d_u == doctest::Approx(ratio_u(12)).epsilon(0.15));
    CHECK(at(1, 3).d_u == doctest::Approx(ratio_u(13)).epsilon(0.15));
    // Transfer repairs the sign flip almost completely.
    CHECK(at(1, 2).d_tf == doctest::Approx(1.0).epsilon(0.15));
    CHECK(at(1, 2).d_tf <= at(1, 2).d_u);
}
