#include "funcdist/panel.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "funcdist/error.hpp"
#include "funcdist/numio.hpp"

namespace funcdist::panel {

const char* const kInputNames[kNumInputs] = {
    "log_assets", "capex_at", "st_debt_at", "lt_debt_at",
    "emp_at",     "ppent_at", "adv_at",     "rd_at",
};

namespace {

const std::vector<std::string>& canonical_fields() {
    static const std::vector<std::string> fields = {
        "firm_id",        "year",          "industry_id",
        "total_assets",   "capex",         "st_debt",
        "lt_debt",        "employees",     "ppent",
        "adv_expense",    "rd_expense",    "shares_outstanding",
        "price_close",    "common_equity", "deferred_taxes",
        "oibdp",          "interest_expense", "income_taxes",
    };
    return fields;
}

}  // namespace

Schema Schema::defaults() {
    Schema s;
    for (const auto& f : canonical_fields()) s.columns[f] = f;
    return s;
}

const std::string& Schema::column(const std::string& canonical) const {
    auto it = columns.find(canonical);
    if (it == columns.end())
        fail_validation("schema: no mapping for canonical field '" + canonical + "'");
    return it->second;
}

void Schema::validate() const {
    const auto& fields = canonical_fields();
    for (const auto& [canonical, col] : columns) {
        if (std::find(fields.begin(), fields.end(), canonical) == fields.end())
            fail_validation("schema: unknown canonical field '" + canonical + "'");
        if (col.empty())
            fail_validation("schema: empty column name for '" + canonical + "'");
    }
    for (const auto& f : fields)
        if (!columns.count(f))
            fail_validation("schema: missing mapping for '" + f + "'");
}

CsvTable RejectionReport::to_csv() const {
    CsvTable t;
    t.header = {"reason", "count"};
    t.rows = {
        {"total_rows", format_int(total_rows)},
        {"kept", format_int(kept)},
        {"missing_field", format_int(missing_field)},
        {"asset_filter", format_int(asset_filter)},
        {"invalid_industry", format_int(invalid_industry)},
    };
    return t;
}

Panel load_firm_panel(const std::string& path, const Schema& schema,
                      const LoadOptions& opts) {
    schema.validate();
    CsvTable csv = read_csv(path);

    std::map<std::string, int> idx;
    for (const auto& f : canonical_fields())
        idx[f] = csv.require(schema.column(f), path);

    Panel panel;
    auto& rej = panel.rejections;
    for (size_t r = 0; r < csv.rows.size(); ++r) {
        ++rej.total_rows;
        const auto& row = csv.rows[r];
        const std::string ctx = path + " row " + std::to_string(r + 2);

        // A single missing required cell drops the row.
        bool missing = false;
        for (const auto& f : canonical_fields()) {
            if (f == "firm_id") continue;
            if (!parse_double_opt(row[static_cast<size_t>(idx[f])]).has_value()) {
                missing = true;
                break;
            }
        }
        if (row[static_cast<size_t>(idx["firm_id"])].empty()) missing = true;
        if (missing) {
            ++rej.missing_field;
            continue;
        }

        FirmYear f;
        f.firm_id = row[static_cast<size_t>(idx["firm_id"])];
        f.year = static_cast<int>(parse_int(row[static_cast<size_t>(idx["year"])], ctx));
        const double ind = parse_double(row[static_cast<size_t>(idx["industry_id"])], ctx);
        if (ind != std::floor(ind) || ind < 1 || ind > kNumIndustries) {
            ++rej.invalid_industry;
            continue;
        }
        f.industry_id = static_cast<int>(ind);

        auto get = [&](const char* name) {
            return parse_double(row[static_cast<size_t>(idx[name])], ctx);
        };
        f.total_assets = get("total_assets");
        f.capex = get("capex");
        f.st_debt = get("st_debt");
        f.lt_debt = get("lt_debt");
        f.employees = get("employees");
        f.ppent = get("ppent");
        f.adv_expense = get("adv_expense");
        f.rd_expense = get("rd_expense");
        f.shares_outstanding = get("shares_outstanding");
        f.price_close = get("price_close");
        f.common_equity = get("common_equity");
        f.deferred_taxes = get("deferred_taxes");
        f.oibdp = get("oibdp");
        f.interest_expense = get("interest_expense");
        f.income_taxes = get("income_taxes");

        if (!(f.total_assets > opts.asset_floor)) {
            ++rej.asset_filter;
            continue;
        }
        ++rej.kept;
        panel.firms.push_back(std::move(f));
    }
    return panel;
}

DerivedVars compute_derived(const FirmYear& f) {
    if (!(f.total_assets > 0))
        fail_validation("compute_derived: total_assets must be positive");
    DerivedVars d;
    const double at = f.total_assets;
    d.inputs[0] = std::log(at);
    d.inputs[1] = f.capex / at;
    d.inputs[2] = f.st_debt / at;
    d.inputs[3] = f.lt_debt / at;
    d.inputs[4] = f.employees / at;
    d.inputs[5] = f.ppent / at;
    d.inputs[6] = f.adv_expense / at;
    d.inputs[7] = f.rd_expense / at;
    d.tobins_q =
        (at + f.shares_outstanding * f.price_close - f.common_equity - f.deferred_taxes) / at;
    if (d.tobins_q > 0) d.log_q = std::log(d.tobins_q);
    d.roa = f.oibdp / at;
    d.book_leverage = (f.st_debt + f.lt_debt) / at;
    d.cash_flow_at = (f.oibdp - f.interest_expense - f.income_taxes - f.capex) / at;
    d.firm_size = std::log(at);
    return d;
}

void demean_columns(Eigen::MatrixXd& X, Eigen::VectorXd& y) {
    if (X.rows() == 0) return;
    const Eigen::RowVectorXd mean = X.colwise().mean();
    X.rowwise() -= mean;
    y.array() -= y.mean();
}

namespace {

void winsorize_column(Eigen::Ref<Eigen::VectorXd> col, double fraction) {
    const Eigen::Index n = col.size();
    std::vector<double> sorted(col.data(), col.data() + n);
    std::sort(sorted.begin(), sorted.end());
    // Nearest-rank percentile on the sorted sample.
    auto rank = [&](double q) {
        Eigen::Index i = static_cast<Eigen::Index>(q * static_cast<double>(n - 1));
        return sorted[static_cast<size_t>(std::clamp<Eigen::Index>(i, 0, n - 1))];
    };
    const double lo = rank(fraction);
    const double hi = rank(1.0 - fraction);
    for (Eigen::Index i = 0; i < n; ++i) col(i) = std::clamp(col(i), lo, hi);
}

}  // namespace

IndustryYearDataset build_dataset(const std::vector<FirmYear>& firms, int industry,
                                  int year, const BuildOptions& opts) {
    if (industry < 1 || industry > kNumIndustries)
        fail_validation("build_dataset: industry must lie in 1.." +
                        std::to_string(kNumIndustries));
    if (opts.min_firms < 1) fail_validation("build_dataset: min_firms must be >= 1");
    if (opts.winsor_fraction < 0 || opts.winsor_fraction >= 0.5)
        fail_validation("build_dataset: winsor_fraction must lie in [0, 0.5)");

    std::vector<const FirmYear*> rows;
    for (const auto& f : firms)
        if (f.industry_id == industry && f.year == year) rows.push_back(&f);

    std::vector<DerivedVars> derived;
    std::vector<const FirmYear*> usable;
    for (const FirmYear* f : rows) {
        DerivedVars d = compute_derived(*f);
        if (opts.kind == OutputKind::LogQ && !d.log_q.has_value()) continue;
        derived.push_back(d);
        usable.push_back(f);
    }

    const auto n = static_cast<Eigen::Index>(usable.size());
    if (n < opts.min_firms)
        fail_validation("industry " + std::to_string(industry) + " year " +
                        std::to_string(year) + ": " + std::to_string(usable.size()) +
                        " usable firms, need " + std::to_string(opts.min_firms));

    IndustryYearDataset ds;
    ds.industry_id = industry;
    ds.year = year;
    ds.kind = opts.kind;
    ds.data.X.resize(n, kNumInputs);
    ds.data.y.resize(n);
    ds.firm_ids.reserve(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& d = derived[static_cast<size_t>(i)];
        for (int c = 0; c < kNumInputs; ++c) ds.data.X(i, c) = d.inputs[c];
        ds.data.y(i) = opts.kind == OutputKind::LogQ ? *d.log_q : d.roa;
        ds.firm_ids.push_back(usable[static_cast<size_t>(i)]->firm_id);
    }

    if (opts.winsor_fraction > 0) {
        for (int c = 0; c < kNumInputs; ++c)
            winsorize_column(ds.data.X.col(c), opts.winsor_fraction);
        winsorize_column(ds.data.y, opts.winsor_fraction);
    }

    demean_columns(ds.data.X, ds.data.y);
    return ds;
}

std::vector<std::pair<int, int>> industry_year_keys(const std::vector<FirmYear>& firms) {
    std::set<std::pair<int, int>> keys;
    for (const auto& f : firms) keys.insert({f.industry_id, f.year});
    return {keys.begin(), keys.end()};
}

}  // namespace funcdist::panel
