// Firm panel loading, derived variables, and industry-year dataset
// construction (filters, winsorization, demeaning).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "funcdist/error.hpp"
#include "funcdist/panel.hpp"
#include "funcdist/synthetic.hpp"

using namespace funcdist;
using panel::FirmYear;
using panel::Schema;

namespace {

const char* kHeader =
    "firm_id,year,industry_id,total_assets,capex,st_debt,lt_debt,employees,ppent,"
    "adv_expense,rd_expense,shares_outstanding,price_close,common_equity,"
    "deferred_taxes,oibdp,interest_expense,income_taxes";

// A complete row with the given overrides spliced in by column index.
std::string row(const std::string& firm, int year, const std::string& industry,
                const std::string& assets) {
    std::ostringstream os;
    os << firm << "," << year << "," << industry << "," << assets
       << ",5,2,8,0.4,30,1,2,10,4.5,40,1.5,12,0.8,2.2";
    return os.str();
}

std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path;
}

FirmYear example_firm() {
    FirmYear f;
    f.firm_id = "F1";
    f.year = 2001;
    f.industry_id = 3;
    f.total_assets = 100.0;
    f.capex = 5.0;
    f.st_debt = 2.0;
    f.lt_debt = 8.0;
    f.employees = 0.4;
    f.ppent = 30.0;
    f.adv_expense = 1.0;
    f.rd_expense = 2.0;
    f.shares_outstanding = 10.0;
    f.price_close = 4.5;
    f.common_equity = 40.0;
    f.deferred_taxes = 1.5;
    f.oibdp = 12.0;
    f.interest_expense = 0.8;
    f.income_taxes = 2.2;
    return f;
}

}  // namespace

TEST_CASE("loader keeps complete rows and counts each rejection reason") {
    std::ostringstream csv;
    csv << kHeader << "\n";
    csv << row("A", 2000, "1", "100") << "\n";       // kept
    csv << row("B", 2000, "2", "150") << "\n";       // kept
    csv << row("", 2000, "1", "100") << "\n";        // missing firm id
    csv << "C,2000,1,100,NA,2,8,0.4,30,1,2,10,4.5,40,1.5,12,0.8,2.2\n";  // missing cell
    csv << row("D", 2000, "13", "100") << "\n";      // industry out of range
    csv << row("E", 2000, "2.5", "100") << "\n";     // fractional industry
    csv << row("F", 2000, "1", "9") << "\n";         // below asset floor
    csv << row("G", 2000, "1", "10") << "\n";        // exactly at floor: dropped
    const auto path = write_temp("funcdist_panel_basic.csv", csv.str());

    const auto p = panel::load_firm_panel(path, Schema::defaults());
    CHECK(p.rejections.total_rows == 8);
    CHECK(p.rejections.kept == 2);
    CHECK(p.rejections.missing_field == 2);
    CHECK(p.rejections.invalid_industry == 2);
    CHECK(p.rejections.asset_filter == 2);
    REQUIRE(p.firms.size() == 2);
    CHECK(p.firms[0].firm_id == "A");
    CHECK(p.firms[1].total_assets == 150.0);

    const CsvTable rep = p.rejections.to_csv();
    CHECK(rep.header == std::vector<std::string>{"reason", "count"});
    bool saw = false;
    for (const auto& r : rep.rows)
        if (r[0] == "missing_field") {
            CHECK(r[1] == "2");
            saw = true;
        }
    CHECK(saw);
    std::filesystem::remove(path);
}

TEST_CASE("loader reports a missing column by name") {
    const auto path = write_temp("funcdist_panel_nocol.csv",
                                 "firm_id,year\nA,2000\n");
    try {
        (void)panel::load_firm_panel(path, Schema::defaults());
        FAIL("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
        CHECK(std::string(e.what()).find("industry_id") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("loader rejects malformed numeric cells with row context") {
    std::ostringstream csv;
    csv << kHeader << "\n" << row("A", 2000, "1", "garbage") << "\n";
    const auto path = write_temp("funcdist_panel_garbage.csv", csv.str());
    CHECK_THROWS_AS((void)panel::load_firm_panel(path, Schema::defaults()), Error);
    std::filesystem::remove(path);
}

TEST_CASE("schema remaps column names") {
    std::string header(kHeader);
    const auto pos = header.find("total_assets");
    header.replace(pos, std::string("total_assets").size(), "at");
    std::ostringstream csv;
    csv << header << "\n" << row("A", 2000, "1", "100") << "\n";
    const auto path = write_temp("funcdist_panel_schema.csv", csv.str());

    Schema schema = Schema::defaults();
    schema.columns["total_assets"] = "at";
    const auto p = panel::load_firm_panel(path, schema);
    CHECK(p.firms.size() == 1);
    CHECK(p.firms[0].total_assets == 100.0);

    // Default schema no longer finds the renamed column.
    CHECK_THROWS_AS((void)panel::load_firm_panel(path, Schema::defaults()), Error);

    Schema bad = Schema::defaults();
    bad.columns["no_such_field"] = "x";
    CHECK_THROWS_AS(bad.validate(), Error);
    std::filesystem::remove(path);
}

TEST_CASE("derived variables match hand computations") {
    const FirmYear f = example_firm();
    const auto d = panel::compute_derived(f);
    CHECK(d.inputs[0] == doctest::Approx(std::log(100.0)).epsilon(1e-12));
    CHECK(d.inputs[1] == doctest::Approx(0.05));
    CHECK(d.inputs[2] == doctest::Approx(0.02));
    CHECK(d.inputs[3] == doctest::Approx(0.08));
    CHECK(d.inputs[4] == doctest::Approx(0.004));
    CHECK(d.inputs[5] == doctest::Approx(0.30));
    CHECK(d.inputs[6] == doctest::Approx(0.01));
    CHECK(d.inputs[7] == doctest::Approx(0.02));
    // Q = (100 + 10*4.5 - 40 - 1.5) / 100 = 1.035
    CHECK(d.tobins_q == doctest::Approx(1.035).epsilon(1e-12));
    REQUIRE(d.log_q.has_value());
    CHECK(*d.log_q == doctest::Approx(std::log(1.035)).epsilon(1e-12));
    CHECK(d.roa == doctest::Approx(0.12));
    CHECK(d.book_leverage == doctest::Approx(0.10));
    // (12 - 0.8 - 2.2 - 5) / 100 = 0.04
    CHECK(d.cash_flow_at == doctest::Approx(0.04));
    CHECK(d.firm_size == d.inputs[0]);

    FirmYear neg = f;
    neg.common_equity = 250.0;  // Q = (100 + 45 - 250 - 1.5)/100 < 0
    CHECK_FALSE(panel::compute_derived(neg).log_q.has_value());

    FirmYear zero = f;
    zero.total_assets = 0.0;
    CHECK_THROWS_AS((void)panel::compute_derived(zero), Error);
}

TEST_CASE("input name list matches wire order") {
    const char* expected[] = {"log_assets", "capex_at", "st_debt_at", "lt_debt_at",
                              "emp_at",     "ppent_at", "adv_at",     "rd_at"};
    for (int i = 0; i < panel::kNumInputs; ++i)
        CHECK(std::string(panel::kInputNames[i]) == expected[i]);
}

TEST_CASE("build_dataset demeans every column to numerical zero") {
    std::vector<FirmYear> firms;
    for (int i = 0; i < 40; ++i) {
        FirmYear f = example_firm();
        f.firm_id = "F" + std::to_string(i);
        f.total_assets = 50.0 + 10.0 * i;
        f.capex = 2.0 + 0.3 * i;
        f.oibdp = 5.0 + 0.2 * i;
        firms.push_back(f);
    }
    panel::BuildOptions opts;
    opts.min_firms = 30;
    const auto ds = panel::build_dataset(firms, 3, 2001, opts);
    CHECK(ds.firms() == 40);
    CHECK(ds.industry_id == 3);
    CHECK(ds.year == 2001);
    for (int c = 0; c < panel::kNumInputs; ++c)
        CHECK(std::abs(ds.data.X.col(c).mean()) < 1e-12);
    CHECK(std::abs(ds.data.y.mean()) < 1e-12);
    CHECK(ds.firm_ids.size() == 40);
    CHECK(ds.firm_ids[0] == "F0");
}

TEST_CASE("build_dataset reports the usable firm count when below minimum") {
    std::vector<FirmYear> firms(5, example_firm());
    panel::BuildOptions opts;
    opts.min_firms = 30;
    try {
        (void)panel::build_dataset(firms, 3, 2001, opts);
        FAIL("expected a validation error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("5 usable firms") != std::string::npos);
        CHECK(msg.find("need 30") != std::string::npos);
    }
}

TEST_CASE("log-Q output drops non-positive-Q rows before the count check") {
    std::vector<FirmYear> firms;
    for (int i = 0; i < 10; ++i) {
        FirmYear f = example_firm();
        f.firm_id = "F" + std::to_string(i);
        if (i < 4) f.common_equity = 500.0;  // negative Q
        firms.push_back(f);
    }
    panel::BuildOptions opts;
    opts.min_firms = 6;
    const auto ds = panel::build_dataset(firms, 3, 2001, opts);
    CHECK(ds.firms() == 6);

    opts.min_firms = 7;
    CHECK_THROWS_AS((void)panel::build_dataset(firms, 3, 2001, opts), Error);

    // ROA keeps all ten rows regardless of Q.
    panel::BuildOptions roa;
    roa.kind = panel::OutputKind::Roa;
    roa.min_firms = 10;
    CHECK(panel::build_dataset(firms, 3, 2001, roa).firms() == 10);
}

TEST_CASE("winsorization clamps tails before demeaning") {
    std::vector<FirmYear> firms;
    for (int i = 0; i < 50; ++i) {
        FirmYear f = example_firm();
        f.firm_id = "F" + std::to_string(i);
        f.capex = (i == 49) ? 1000.0 : 5.0;  // one extreme capex/at outlier
        firms.push_back(f);
    }
    panel::BuildOptions plain, wins;
    plain.min_firms = wins.min_firms = 30;
    wins.winsor_fraction = 0.05;
    const auto a = panel::build_dataset(firms, 3, 2001, plain);
    const auto b = panel::build_dataset(firms, 3, 2001, wins);
    const double spread_a = a.data.X.col(1).maxCoeff() - a.data.X.col(1).minCoeff();
    const double spread_b = b.data.X.col(1).maxCoeff() - b.data.X.col(1).minCoeff();
    CHECK(spread_b < spread_a * 0.01);  // the outlier dominates the raw spread

    panel::BuildOptions bad = plain;
    bad.winsor_fraction = 0.5;
    CHECK_THROWS_AS((void)panel::build_dataset(firms, 3, 2001, bad), Error);
}

TEST_CASE("industry_year_keys lists distinct sorted pairs") {
    std::vector<FirmYear> firms;
    auto add = [&](int ind, int yr) {
        FirmYear f = example_firm();
        f.industry_id = ind;
        f.year = yr;
        firms.push_back(f);
    };
    add(2, 2001);
    add(1, 2002);
    add(2, 2001);  // duplicate key
    add(1, 2000);
    const auto keys = panel::industry_year_keys(firms);
    REQUIRE(keys.size() == 3);
    CHECK(keys[0] == std::pair<int, int>{1, 2000});
    CHECK(keys[1] == std::pair<int, int>{1, 2002});
    CHECK(keys[2] == std::pair<int, int>{2, 2001});
}

TEST_CASE("generated firm panels load back consistently") {
    econ::FirmPanelParams p;
    p.industries = 4;
    p.firms_per_industry = 50;
    p.years = 2;
    const CsvTable t = econ::gen_firm_panel(p, 77);
    CHECK(t.rows.size() == 4u * 50u * 2u);
    const auto path = write_temp("funcdist_panel_gen.csv", "");
    write_csv(path, t);

    const auto loaded = panel::load_firm_panel(path, Schema::defaults());
    CHECK(loaded.rejections.total_rows == static_cast<long long>(t.rows.size()));
    CHECK(loaded.rejections.kept + loaded.rejections.missing_field +
              loaded.rejections.asset_filter + loaded.rejections.invalid_industry ==
          loaded.rejections.total_rows);
    // The generator plants a small share of each corruption.
    CHECK(loaded.rejections.kept > 300);
    CHECK(loaded.rejections.missing_field > 0);

    // Deterministic: a second generation is identical.
    const CsvTable again = econ::gen_firm_panel(p, 77);
    CHECK(again.rows == t.rows);
    std::filesystem::remove(path);
}
