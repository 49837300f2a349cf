#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "funcdist/csv.hpp"
#include "funcdist/dataset.hpp"

namespace funcdist::panel {

inline constexpr int kNumIndustries = 12;
inline constexpr int kNumInputs = 8;

// Raw firm-year record; monetary fields in millions.
struct FirmYear {
    std::string firm_id;
    int year = 0;
    int industry_id = 0;  // 1..12
    double total_assets = 0;
    double capex = 0;
    double st_debt = 0;
    double lt_debt = 0;
    double employees = 0;
    double ppent = 0;
    double adv_expense = 0;
    double rd_expense = 0;
    double shares_outstanding = 0;
    double price_close = 0;
    double common_equity = 0;
    double deferred_taxes = 0;
    double oibdp = 0;
    double interest_expense = 0;
    double income_taxes = 0;
};

// Canonical field -> CSV column mapping; defaults to identity names.
struct Schema {
    std::map<std::string, std::string> columns;

    static Schema defaults();
    const std::string& column(const std::string& canonical) const;
    // Rejects mappings for unknown canonical fields.
    void validate() const;
};

struct RejectionReport {
    long long total_rows = 0;
    long long kept = 0;
    long long missing_field = 0;
    long long asset_filter = 0;
    long long invalid_industry = 0;

    CsvTable to_csv() const;
};

struct Panel {
    std::vector<FirmYear> firms;
    RejectionReport rejections;
};

struct LoadOptions {
    double asset_floor = 10.0;  // drop firm-years with total assets <= floor
};

Panel load_firm_panel(const std::string& path, const Schema& schema,
                      const LoadOptions& opts = {});

// Per-firm transformations of the raw record.
struct DerivedVars {
    // The eight network inputs, in wire order.
    double inputs[kNumInputs] = {0};  // log_assets, capex_at, st_debt_at,
                                      // lt_debt_at, emp_at, ppent_at, adv_at, rd_at
    double tobins_q = 0;              // (at + shares*price - ceq - txdb) / at
    std::optional<double> log_q;      // only when tobins_q > 0
    double roa = 0;                   // oibdp / at
    double book_leverage = 0;         // (st_debt + lt_debt) / at
    double cash_flow_at = 0;          // (oibdp - xint - txt - capx) / at
    double firm_size = 0;             // log assets
};

extern const char* const kInputNames[kNumInputs];

DerivedVars compute_derived(const FirmYear& f);

// Demeans each column in place (the industry-year adjustment step).
void demean_columns(Eigen::MatrixXd& X, Eigen::VectorXd& y);

enum class OutputKind { LogQ, Roa };

struct IndustryYearDataset {
    int industry_id = 0;
    int year = 0;
    OutputKind kind = OutputKind::LogQ;
    Dataset data;  // industry-mean adjusted
    std::vector<std::string> firm_ids;

    Eigen::Index firms() const { return data.rows(); }
};

struct BuildOptions {
    OutputKind kind = OutputKind::LogQ;
    int min_firms = 30;
    // Symmetric winsorization fraction per tail within the industry-year
    // sample; 0 disables.
    double winsor_fraction = 0.0;
};

// Rows for (industry, year) -> adjusted dataset. Throws Error(Validation)
// carrying the observed firm count when below min_firms; LogQ drops
// non-positive-Q rows first.
IndustryYearDataset build_dataset(const std::vector<FirmYear>& firms, int industry,
                                  int year, const BuildOptions& opts);

// Distinct (industry, year) keys present in the panel, sorted.
std::vector<std::pair<int, int>> industry_year_keys(const std::vector<FirmYear>& firms);

}  // namespace funcdist::panel
