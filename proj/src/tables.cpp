#include "funcdist/tables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>

#include <nlohmann/json.hpp>

#include "funcdist/econometrics.hpp"
#include "funcdist/error.hpp"
#include "funcdist/numio.hpp"
#include "funcdist/parallel.hpp"

namespace funcdist::econ {

namespace {

std::string int_label(double v) { return format_int(std::llround(v)); }

// "" for NaN so absent statistics stay blank in tabular output.
std::string fmt_opt(double v) { return std::isnan(v) ? std::string() : format_double(v); }

std::vector<long long> sorted_years(const DataFrame& counts) {
    std::set<long long> years;
    const auto& col = counts.col("year");
    for (Eigen::Index i = 0; i < col.size(); ++i) years.insert(std::llround(col(i)));
    return {years.begin(), years.end()};
}

const std::vector<std::string> kDealControls = {"ln_deal_value", "cash_only", "hostile"};

}  // namespace

DataFrame counts_frame(const std::vector<distance::DistanceMatrix>& distances) {
    std::size_t n = 0;
    for (const auto& mat : distances) n += mat.records.size();

    auto vec = [n] { return Eigen::VectorXd(static_cast<Eigen::Index>(n)); };
    Eigen::VectorXd year = vec(), acq = vec(), tgt = vec(), du = vec(), dtf = vec(),
                    ldu = vec(), ldtf = vec(), rx = vec(), rt = vec(), ro = vec();
    Eigen::Index i = 0;
    for (const auto& mat : distances)
        for (const auto& rec : mat.records) {
            year(i) = rec.year;
            acq(i) = rec.acq_industry;
            tgt(i) = rec.tgt_industry;
            du(i) = rec.d_u;
            dtf(i) = rec.d_tf;
            ldu(i) = rec.log_d_u;
            ldtf(i) = rec.log_d_tf;
            rx(i) = rec.rmse_cross;
            rt(i) = rec.rmse_tf;
            ro(i) = rec.rmse_own;
            ++i;
        }

    DataFrame f;
    f.add("year", std::move(year));
    f.add("acq_industry", std::move(acq));
    f.add("tgt_industry", std::move(tgt));
    f.add("d_u", std::move(du));
    f.add("d_tf", std::move(dtf));
    f.add("log_d_u", std::move(ldu));
    f.add("log_d_tf", std::move(ldtf));
    f.add("rmse_cross", std::move(rx));
    f.add("rmse_tf", std::move(rt));
    f.add("rmse_own", std::move(ro));
    return f;
}

void augment_transfer_columns(DataFrame& counts) {
    Eigen::VectorXd resid =
        orthogonalize(counts, "log_d_tf", {"log_d_u"},
                      {"year", "acq_industry", "tgt_industry"});
    counts.add("tf_resid", resid);
    counts.add("du_x_tfresid", counts.col("log_d_u").cwiseProduct(resid));
}

std::vector<std::string> known_batteries() {
    return {"counts_by_year", "counts_pooled", "transfer_channel",
            "completion",     "announcement",  "survival"};
}

std::vector<PipelineItem> build_table_pipeline(const DataFrame* counts,
                                               const DataFrame* deals,
                                               const std::vector<std::string>& batteries) {
    std::vector<std::string> selected = batteries;
    if (selected.size() == 1 && selected.front() == "auto") {
        selected.clear();
        if (counts && counts->has("log1p_deals")) {
            selected.push_back("counts_by_year");
            selected.push_back("counts_pooled");
            if (counts->has("log_d_tf")) selected.push_back("transfer_channel");
        }
        if (deals) {
            selected.push_back("completion");
            selected.push_back("announcement");
            selected.push_back("survival");
        }
    }
    const auto known = known_batteries();
    for (const auto& b : selected)
        if (std::find(known.begin(), known.end(), b) == known.end())
            fail_validation("unknown regression battery '" + b + "'");

    std::vector<PipelineItem> items;
    auto add = [&items](std::string frame, RegressionSpec spec,
                        std::optional<std::pair<std::string, double>> subset = {}) {
        items.push_back({std::move(frame), std::move(subset), std::move(spec)});
    };

    for (const auto& b : selected) {
        if (b == "counts_by_year") {
            // One classical cross-section per year.
            std::vector<long long> years;
            if (counts && counts->has("year"))
                years = sorted_years(*counts);
            if (years.empty()) {
                add("counts", {"counts_by_year", Model::Ols, "log1p_deals",
                               {"log_d_u"}, {}, ""});
            } else {
                for (long long y : years)
                    add("counts",
                        {"counts_by_year/" + format_int(y), Model::Ols, "log1p_deals",
                         {"log_d_u"}, {}, ""},
                        std::make_pair(std::string("year"), static_cast<double>(y)));
            }
        } else if (b == "counts_pooled") {
            for (const std::string m : {"log_d_u", "log_d_tf"}) {
                add("counts", {"counts_pooled/" + m + "/none", Model::Ols,
                               "log1p_deals", {m}, {}, "year"});
                add("counts", {"counts_pooled/" + m + "/year", Model::Ols,
                               "log1p_deals", {m}, {"year"}, "year"});
                add("counts",
                    {"counts_pooled/" + m + "/year_industry", Model::Ols, "log1p_deals",
                     {m}, {"year", "acq_industry", "tgt_industry"}, "year"});
            }
        } else if (b == "transfer_channel") {
            add("counts", {"transfer_channel/levels", Model::Ols, "log1p_deals",
                           {"log_d_u", "tf_resid"},
                           {"year", "acq_industry", "tgt_industry"}, "year"});
            add("counts", {"transfer_channel/interaction", Model::Ols, "log1p_deals",
                           {"log_d_u", "tf_resid", "du_x_tfresid"},
                           {"year", "acq_industry", "tgt_industry"}, "year"});
        } else if (b == "completion") {
            for (const std::string m : {"log_d_u", "log_d_tf"}) {
                std::vector<std::string> regs = {m};
                regs.insert(regs.end(), kDealControls.begin(), kDealControls.end());
                add("deals", {"completion/" + m, Model::Probit, "completed", regs,
                              {"year"}, "year"});
            }
        } else if (b == "announcement") {
            for (const std::string dep : {"car_ew", "car_vw"}) {
                std::vector<std::string> regs = {"log_d_u"};
                regs.insert(regs.end(), kDealControls.begin(), kDealControls.end());
                regs.push_back("diversify");
                add("deals", {"announcement/" + dep, Model::Ols, dep, regs, {"year"},
                              "year"});
            }
        } else if (b == "survival") {
            for (const std::string dep : {"survive1", "survive2"}) {
                std::vector<std::string> regs = {"log_d_u"};
                regs.insert(regs.end(), kDealControls.begin(), kDealControls.end());
                add("deals",
                    {"survival/" + dep, Model::Probit, dep, regs, {"year"}, "year"},
                    std::make_pair(std::string("completed"), 1.0));
            }
        }
    }
    return items;
}

Report run_pipeline(const DataFrame* counts, const DataFrame* deals,
                    const std::vector<PipelineItem>& items, int workers) {
    Report report;
    report.entries.resize(items.size());

    parallel_jobs(items.size(), workers, [&](std::size_t i) {
        ReportEntry& entry = report.entries[i];
        entry.item = items[i];
        try {
            const DataFrame* frame = nullptr;
            if (items[i].frame == "counts")
                frame = counts;
            else if (items[i].frame == "deals")
                frame = deals;
            else
                fail_validation("unknown frame '" + items[i].frame + "'");
            if (!frame)
                fail_validation("frame '" + items[i].frame + "' not provided");

            DataFrame subset;
            if (items[i].subset) {
                subset = frame->where_equal(items[i].subset->first, items[i].subset->second);
                frame = &subset;
            }
            entry.result = items[i].spec.model == Model::Probit
                               ? probit_fit(*frame, items[i].spec)
                               : ols_fe(*frame, items[i].spec);
            entry.ok = true;
        } catch (const std::exception& e) {
            entry.ok = false;
            entry.error = e.what();
        }
    });
    return report;
}

namespace {

std::string subset_string(const PipelineItem& item) {
    if (!item.subset) return "";
    return item.subset->first + "=" + int_label(item.subset->second);
}

}  // namespace

CsvTable report_to_csv(const Report& report) {
    CsvTable t;
    t.header = {"label", "frame", "subset",     "model", "ok",  "error",
                "term",  "coef",  "se",         "t",     "p",   "stars",
                "ame",   "ame_se", "n",         "n_clusters", "df_t", "r2",
                "pseudo_r2"};
    for (const auto& e : report.entries) {
        const std::string model = e.item.spec.model == Model::Probit ? "probit" : "ols";
        if (!e.ok) {
            t.rows.push_back({e.item.spec.label, e.item.frame, subset_string(e.item),
                              model, "0", e.error, "", "", "", "", "", "", "", "", "",
                              "", "", "", ""});
            continue;
        }
        for (const auto& term : e.result.terms)
            t.rows.push_back({e.item.spec.label, e.item.frame, subset_string(e.item),
                              model, "1", "", term.name, format_double(term.coef),
                              format_double(term.se), format_double(term.t),
                              format_double(term.p), term.stars, fmt_opt(term.ame),
                              fmt_opt(term.ame_se), format_int(e.result.n),
                              format_int(e.result.n_clusters),
                              format_double(e.result.df_t), fmt_opt(e.result.r2),
                              fmt_opt(e.result.pseudo_r2)});
    }
    return t;
}

nlohmann::json report_to_json(const Report& report) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : report.entries) {
        nlohmann::json j;
        j["label"] = e.item.spec.label;
        j["frame"] = e.item.frame;
        if (e.item.subset) j["subset"] = subset_string(e.item);
        j["model"] = e.item.spec.model == Model::Probit ? "probit" : "ols";
        j["ok"] = e.ok;
        if (!e.ok) {
            j["error"] = e.error;
            out.push_back(std::move(j));
            continue;
        }
        j["n"] = e.result.n;
        j["n_clusters"] = e.result.n_clusters;
        j["df_t"] = e.result.df_t;
        if (!std::isnan(e.result.r2)) j["r2"] = e.result.r2;
        if (!std::isnan(e.result.pseudo_r2)) j["pseudo_r2"] = e.result.pseudo_r2;
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& term : e.result.terms) {
            nlohmann::json tj;
            tj["name"] = term.name;
            tj["coef"] = term.coef;
            tj["se"] = term.se;
            tj["t"] = term.t;
            tj["p"] = term.p;
            tj["stars"] = term.stars;
            if (!std::isnan(term.ame)) {
                tj["ame"] = term.ame;
                tj["ame_se"] = term.ame_se;
            }
            terms.push_back(std::move(tj));
        }
        j["terms"] = std::move(terms);
        out.push_back(std::move(j));
    }
    return out;
}

namespace {

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string num(double v) { return std::isnan(v) ? "." : format_double_fixed(v, 4); }

}  // namespace

std::string report_to_text(const Report& report) {
    std::string out;
    for (const auto& e : report.entries) {
        out += "== " + e.item.spec.label + " [" +
               (e.item.spec.model == Model::Probit ? "probit" : "ols") + " on " +
               e.item.frame;
        if (e.item.subset) out += ", " + subset_string(e.item);
        out += "]\n";
        if (!e.ok) {
            out += "   FAILED: " + e.error + "\n\n";
            continue;
        }
        out += "   n=" + format_int(e.result.n);
        if (e.result.n_clusters > 0)
            out += "  clusters=" + format_int(e.result.n_clusters);
        if (!std::isnan(e.result.r2)) out += "  R2=" + num(e.result.r2);
        if (!std::isnan(e.result.pseudo_r2))
            out += "  pseudoR2=" + num(e.result.pseudo_r2);
        out += "\n";
        const bool any_ame =
            std::any_of(e.result.terms.begin(), e.result.terms.end(),
                        [](const Term& t) { return !std::isnan(t.ame); });
        out += "   " + pad("term", 18) + pad("coef", 12) + pad("se", 12) +
               pad("t", 10) + pad("p", 10) + pad("sig", 5);
        if (any_ame) out += pad("ame", 12) + pad("ame_se", 12);
        out += "\n";
        for (const auto& term : e.result.terms) {
            out += "   " + pad(term.name, 18) + pad(num(term.coef), 12) +
                   pad(num(term.se), 12) + pad(num(term.t), 10) + pad(num(term.p), 10) +
                   pad(term.stars, 5);
            if (any_ame) out += pad(num(term.ame), 12) + pad(num(term.ame_se), 12);
            out += "\n";
        }
        out += "\n";
    }
    return out;
}

}  // namespace funcdist::econ
