#include "funcdist/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "funcdist/error.hpp"
#include "funcdist/neural.hpp"
#include "funcdist/numio.hpp"
#include "funcdist/panel.hpp"
#include "funcdist/rng.hpp"

namespace funcdist::econ {

namespace {

std::string year_tag(const char* what, int year) {
    return std::string("synthetic/") + what + "/year=" + std::to_string(year);
}

}  // namespace

std::vector<distance::DistanceMatrix> gen_synthetic_distances(const SyntheticParams& p,
                                                              std::uint64_t seed) {
    if (p.industries < 2) fail_validation("synthetic: need at least 2 industries");
    if (p.years < 1) fail_validation("synthetic: need at least 1 year");

    std::vector<distance::DistanceMatrix> series;
    series.reserve(static_cast<std::size_t>(p.years));
    const int m = p.industries;

    for (int t = 0; t < p.years; ++t) {
        const int year = p.first_year + t;
        Rng rng(child_seed(seed, year_tag("distances", year)));

        distance::DistanceMatrix mat;
        mat.year = year;
        mat.convention = distance::Convention::Rmse;
        for (int i = 1; i <= m; ++i) mat.industries.push_back(i);
        mat.d_u.setOnes(m, m);
        mat.d_tf.setOnes(m, m);

        // Per-target own error first, then pair draws in row-major order, so
        // the stream layout is stable under parameter changes elsewhere.
        std::vector<double> own(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) own[static_cast<std::size_t>(i)] = 0.10 + 0.02 * rng.uniform01();

        for (int a = 0; a < m; ++a) {
            for (int g = 0; g < m; ++g) {
                distance::DistanceRecord rec;
                rec.year = year;
                rec.acq_industry = a + 1;
                rec.tgt_industry = g + 1;
                rec.rmse_own = own[static_cast<std::size_t>(g)];
                if (a == g) {
                    rec.d_u = rec.d_tf = 1.0;
                    rec.log_d_u = rec.log_d_tf = 0.0;
                    rec.rmse_cross = rec.rmse_tf = rec.rmse_own;
                } else {
                    const double lu = std::abs(rng.normal(p.dist_mu, p.dist_sd));
                    double ltf = p.tf_scale * lu + rng.normal(0.0, p.tf_noise_sd);
                    // Output-layer retraining can never lose to the frozen
                    // network, so the synthetic panel honours the same bounds.
                    ltf = std::clamp(ltf, 0.0, lu);
                    rec.log_d_u = lu;
                    rec.log_d_tf = ltf;
                    rec.d_u = std::exp(lu);
                    rec.d_tf = std::exp(ltf);
                    rec.rmse_cross = rec.d_u * rec.rmse_own;
                    rec.rmse_tf = rec.d_tf * rec.rmse_own;
                    mat.d_u(a, g) = rec.d_u;
                    mat.d_tf(a, g) = rec.d_tf;
                }
                mat.records.push_back(rec);
            }
        }
        series.push_back(std::move(mat));
    }
    return series;
}

SyntheticPanels generate_synthetic_deals(
    const std::vector<distance::DistanceMatrix>& distances, const SyntheticParams& p,
    std::uint64_t seed) {
    if (distances.empty()) fail_validation("synthetic: empty distance panel");

    // Year and industry shifters drawn once, in a fixed order.
    std::vector<int> years;
    for (const auto& mat : distances) years.push_back(mat.year);
    const int m = static_cast<int>(distances.front().industries.size());
    for (const auto& mat : distances)
        if (static_cast<int>(mat.industries.size()) != m)
            fail_validation("synthetic: distance panel has ragged industry sets");

    Rng fx(child_seed(seed, "synthetic/effects"));
    std::vector<double> year_fx(years.size());
    for (auto& v : year_fx) v = fx.normal(0.0, p.year_effect_sd);
    std::vector<double> acq_fx(static_cast<std::size_t>(m));
    for (auto& v : acq_fx) v = fx.normal(0.0, p.industry_effect_sd);
    std::vector<double> tgt_fx(static_cast<std::size_t>(m));
    for (auto& v : tgt_fx) v = fx.normal(0.0, p.industry_effect_sd);

    struct CountRow {
        double year, acq, tgt, d_u, d_tf, log_d_u, log_d_tf, n_deals, log1p_deals;
    };
    std::vector<CountRow> count_rows;

    struct DealRow {
        double year, acq, tgt, d_u, d_tf, log_d_u, log_d_tf, diversify, completed,
            survive1, survive2, car_ew, car_vw, ln_deal_value, cash_only, hostile;
    };
    std::vector<DealRow> deal_rows;

    for (std::size_t t = 0; t < distances.size(); ++t) {
        const auto& mat = distances[t];
        Rng cnt(child_seed(seed, year_tag("counts", mat.year)));

        for (const auto& rec : mat.records) {
            const int ai = rec.acq_industry - 1;
            const int gi = rec.tgt_industry - 1;
            if (ai < 0 || ai >= m || gi < 0 || gi >= m)
                fail_validation("synthetic: distance record outside industry grid");

            // The transfer channel is planted through the component of
            // log d_TF not explained by log d_U, mirroring the
            // orthogonalization used at estimation time.
            const double tf_innov = rec.log_d_tf - p.tf_scale * rec.log_d_u;
            const double log_mean = p.lambda0 + p.gamma_count * rec.log_d_u +
                                    p.gamma_tf_resid * tf_innov +
                                    p.gamma_interaction * rec.log_d_u * tf_innov +
                                    year_fx[t] + acq_fx[static_cast<std::size_t>(ai)] +
                                    tgt_fx[static_cast<std::size_t>(gi)] +
                                    cnt.normal(0.0, p.pair_noise_sd);
            if (log_mean > 20.0)
                fail_validation("synthetic: deal intensity overflow (log mean " +
                                format_double(log_mean) + "); lower lambda0 or |gamma|");
            const long long n = cnt.poisson(std::exp(log_mean));

            count_rows.push_back({static_cast<double>(mat.year),
                                  static_cast<double>(rec.acq_industry),
                                  static_cast<double>(rec.tgt_industry), rec.d_u, rec.d_tf,
                                  rec.log_d_u, rec.log_d_tf, static_cast<double>(n),
                                  std::log1p(static_cast<double>(n))});

            if (!p.with_deals || n == 0) continue;
            Rng dr(child_seed(seed, year_tag("deals", mat.year) +
                                        "/acq=" + std::to_string(rec.acq_industry) +
                                        "/tgt=" + std::to_string(rec.tgt_industry)));
            for (long long d = 0; d < n; ++d) {
                DealRow row{};
                row.year = static_cast<double>(mat.year);
                row.acq = static_cast<double>(rec.acq_industry);
                row.tgt = static_cast<double>(rec.tgt_industry);
                row.d_u = rec.d_u;
                row.d_tf = rec.d_tf;
                row.log_d_u = rec.log_d_u;
                row.log_d_tf = rec.log_d_tf;
                row.diversify = rec.acq_industry != rec.tgt_industry ? 1.0 : 0.0;

                const double zc =
                    p.completion_intercept + p.completion_dist * rec.log_d_u + dr.normal();
                row.completed = zc > 0 ? 1.0 : 0.0;
                const double z1 =
                    p.survival1_intercept + p.survival1_dist * rec.log_d_u + dr.normal();
                const double z2 =
                    p.survival2_intercept + p.survival2_dist * rec.log_d_u + dr.normal();
                row.survive1 = (row.completed > 0 && z1 > 0) ? 1.0 : 0.0;
                row.survive2 = (row.survive1 > 0 && z2 > 0) ? 1.0 : 0.0;

                const double car_mean = p.car_intercept + p.car_dist * rec.log_d_u;
                row.car_ew = car_mean + dr.normal(0.0, p.car_noise_sd);
                row.car_vw = car_mean + dr.normal(0.0, p.car_noise_sd);
                row.ln_deal_value = dr.normal(4.0, 1.0);
                row.cash_only = dr.bernoulli(0.4) ? 1.0 : 0.0;
                row.hostile = dr.bernoulli(0.05) ? 1.0 : 0.0;
                deal_rows.push_back(row);
            }
        }
    }

    auto column = [](const auto& rows, auto member) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            v(static_cast<Eigen::Index>(i)) = rows[i].*member;
        return v;
    };

    SyntheticPanels out;
    out.counts.add("year", column(count_rows, &CountRow::year));
    out.counts.add("acq_industry", column(count_rows, &CountRow::acq));
    out.counts.add("tgt_industry", column(count_rows, &CountRow::tgt));
    out.counts.add("d_u", column(count_rows, &CountRow::d_u));
    out.counts.add("d_tf", column(count_rows, &CountRow::d_tf));
    out.counts.add("log_d_u", column(count_rows, &CountRow::log_d_u));
    out.counts.add("log_d_tf", column(count_rows, &CountRow::log_d_tf));
    out.counts.add("n_deals", column(count_rows, &CountRow::n_deals));
    out.counts.add("log1p_deals", column(count_rows, &CountRow::log1p_deals));

    if (p.with_deals) {
        out.deals.add("year", column(deal_rows, &DealRow::year));
        out.deals.add("acq_industry", column(deal_rows, &DealRow::acq));
        out.deals.add("tgt_industry", column(deal_rows, &DealRow::tgt));
        out.deals.add("d_u", column(deal_rows, &DealRow::d_u));
        out.deals.add("d_tf", column(deal_rows, &DealRow::d_tf));
        out.deals.add("log_d_u", column(deal_rows, &DealRow::log_d_u));
        out.deals.add("log_d_tf", column(deal_rows, &DealRow::log_d_tf));
        out.deals.add("diversify", column(deal_rows, &DealRow::diversify));
        out.deals.add("completed", column(deal_rows, &DealRow::completed));
        out.deals.add("survive1", column(deal_rows, &DealRow::survive1));
        out.deals.add("survive2", column(deal_rows, &DealRow::survive2));
        out.deals.add("car_ew", column(deal_rows, &DealRow::car_ew));
        out.deals.add("car_vw", column(deal_rows, &DealRow::car_vw));
        out.deals.add("ln_deal_value", column(deal_rows, &DealRow::ln_deal_value));
        out.deals.add("cash_only", column(deal_rows, &DealRow::cash_only));
        out.deals.add("hostile", column(deal_rows, &DealRow::hostile));
    }
    return out;
}

CsvTable gen_firm_panel(const FirmPanelParams& p, std::uint64_t seed) {
    if (p.industries < 1 || p.industries > panel::kNumIndustries)
        fail_validation("synthetic panel: industries must be 1.." +
                        std::to_string(panel::kNumIndustries));
    if (p.firms_per_industry < 1 || p.years < 1)
        fail_validation("synthetic panel: need at least one firm and one year");

    // Each industry's production surface is a fixed random small network over
    // the eight inputs, so industries differ in functional form, not just in
    // coefficients.
    neural::Architecture truth_arch{{panel::kNumInputs, 6, 1}};
    std::vector<neural::WeightSet> truth;
    truth.reserve(static_cast<std::size_t>(p.industries));
    for (int i = 1; i <= p.industries; ++i)
        truth.push_back(neural::init_network(
            truth_arch, child_seed(seed, "synthetic/panel/truth=" + std::to_string(i))));

    CsvTable out;
    out.header = {"firm_id",        "year",          "industry_id",
                  "total_assets",   "capex",         "st_debt",
                  "lt_debt",        "employees",     "ppent",
                  "adv_expense",    "rd_expense",    "shares_outstanding",
                  "price_close",    "common_equity", "deferred_taxes",
                  "oibdp",          "interest_expense", "income_taxes"};

    Rng rng(child_seed(seed, "synthetic/panel"));
    Eigen::VectorXd x(panel::kNumInputs);

    for (int ind = 1; ind <= p.industries; ++ind) {
        const auto& net = truth[static_cast<std::size_t>(ind - 1)];
        for (int f = 0; f < p.firms_per_industry; ++f) {
            const std::string firm_id =
                "F" + std::to_string(ind) + "_" + std::to_string(f + 1);
            for (int t = 0; t < p.years; ++t) {
                const int year = p.first_year + t;

                const double at = std::exp(rng.normal(4.8, 1.5));
                x(0) = std::log(at);
                x(1) = 0.15 * rng.uniform01();          // capex / assets
                x(2) = 0.10 * rng.uniform01();          // short-term debt / assets
                x(3) = 0.30 * rng.uniform01();          // long-term debt / assets
                x(4) = 0.02 * rng.uniform01();          // employees / assets
                x(5) = 0.05 + 0.55 * rng.uniform01();   // net PP&E / assets
                x(6) = 0.05 * rng.uniform01();          // advertising / assets
                x(7) = 0.10 * rng.uniform01();          // R&D / assets

                const double signal = std::clamp(neural::forward(net, x), -1.5, 1.5);
                const double log_q = 0.35 + 0.25 * signal + rng.normal(0.0, p.noise_sd);
                const double q = std::exp(log_q);
                const double roa =
                    0.08 + 0.2 * (log_q - 0.35) + rng.normal(0.0, 0.5 * p.noise_sd);

                // Rare corruptions keep the loader's filters exercised:
                // an empty R&D cell, an out-of-range industry code, or a
                // book-equity spike that drives Tobin's Q non-positive.
                const double u_reject = rng.uniform01();
                const bool blank_rd = u_reject < 0.010;
                const bool bad_industry = u_reject >= 0.010 && u_reject < 0.015;
                const bool negative_q = u_reject >= 0.015 && u_reject < 0.022;

                const double ceq_frac = negative_q ? 2.5 : 0.30;
                const double txdb_frac = 0.02;
                const double shares = at / 20.0;
                // Solves (at + shares*price - ceq - txdb) / at = q for price.
                const double price =
                    (q - 1.0 + ceq_frac + txdb_frac) * at / shares;

                std::vector<std::string> row;
                row.reserve(out.header.size());
                row.push_back(firm_id);
                row.push_back(format_int(year));
                row.push_back(format_int(bad_industry ? 99 : ind));
                row.push_back(format_double(at));
                row.push_back(format_double(x(1) * at));
                row.push_back(format_double(x(2) * at));
                row.push_back(format_double(x(3) * at));
                row.push_back(format_double(x(4) * at));
                row.push_back(format_double(x(5) * at));
                row.push_back(format_double(x(6) * at));
                row.push_back(blank_rd ? std::string()
                                       : format_double(x(7) * at));
                row.push_back(format_double(shares));
                row.push_back(format_double(price));
                row.push_back(format_double(ceq_frac * at));
                row.push_back(format_double(txdb_frac * at));
                row.push_back(format_double(roa * at));
                row.push_back(format_double(0.02 * at));
                row.push_back(format_double(0.01 * at));
                out.rows.push_back(std::move(row));
            }
        }
    }
    return out;
}

}  // namespace funcdist::econ
