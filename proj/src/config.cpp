#include "funcdist/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "funcdist/error.hpp"
#include "funcdist/numio.hpp"

namespace funcdist::config {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (auto t = trim(cur); !t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (auto t = trim(cur); !t.empty()) out.push_back(t);
    return out;
}

// Pulls typed values out of the parsed file, erasing each consumed key so
// whatever remains afterwards is by definition unknown.
class Reader {
public:
    Reader(IniMap ini, std::string ctx) : ini_(std::move(ini)), ctx_(std::move(ctx)) {}

    bool take(const std::string& section, const std::string& key, std::string& out) {
        auto s = ini_.sections.find(section);
        if (s == ini_.sections.end()) return false;
        auto it = s->second.find(key);
        if (it == s->second.end()) return false;
        out = it->second;
        s->second.erase(it);
        return true;
    }

    void get(const std::string& sec, const std::string& key, std::string& v) {
        std::string raw;
        if (take(sec, key, raw)) v = raw;
    }
    void get(const std::string& sec, const std::string& key, double& v) {
        std::string raw;
        if (take(sec, key, raw)) v = parse_double(raw, where(sec, key));
    }
    void get(const std::string& sec, const std::string& key, int& v) {
        std::string raw;
        if (take(sec, key, raw)) v = static_cast<int>(parse_int(raw, where(sec, key)));
    }
    void get(const std::string& sec, const std::string& key, long long& v) {
        std::string raw;
        if (take(sec, key, raw)) v = parse_int(raw, where(sec, key));
    }
    void get(const std::string& sec, const std::string& key, std::uint64_t& v) {
        std::string raw;
        if (!take(sec, key, raw)) return;
        std::uint64_t parsed = 0;
        auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), parsed);
        if (ec != std::errc() || p != raw.data() + raw.size())
            fail_validation(where(sec, key) + ": expected unsigned integer, got '" + raw +
                            "'");
        v = parsed;
    }
    void get(const std::string& sec, const std::string& key, bool& v) {
        std::string raw;
        if (!take(sec, key, raw)) return;
        if (raw == "true" || raw == "1" || raw == "yes")
            v = true;
        else if (raw == "false" || raw == "0" || raw == "no")
            v = false;
        else
            fail_validation(where(sec, key) + ": expected boolean, got '" + raw + "'");
    }

    std::map<std::string, std::string> take_section(const std::string& section) {
        auto s = ini_.sections.find(section);
        if (s == ini_.sections.end()) return {};
        auto out = std::move(s->second);
        s->second.clear();
        return out;
    }

    // Everything not consumed is an unknown key or section.
    void finish(const std::set<std::string>& known_sections) const {
        for (const auto& [name, keys] : ini_.sections) {
            if (!known_sections.count(name))
                fail_validation(ctx_ + ": unknown section [" + name + "]");
            if (!keys.empty())
                fail_validation(ctx_ + ": unknown key '" + name + "." +
                                keys.begin()->first + "'");
        }
    }

    std::string where(const std::string& sec, const std::string& key) const {
        return ctx_ + ": [" + sec + "] " + key;
    }

private:
    IniMap ini_;
    std::string ctx_;
};

std::string bool_str(bool v) { return v ? "true" : "false"; }

}  // namespace

IniMap parse_ini(const std::string& text, const std::string& context) {
    IniMap out;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#' || t.front() == ';') continue;
        const std::string at = context + " line " + std::to_string(lineno);
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                fail_validation(at + ": malformed section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) fail_validation(at + ": empty section name");
            out.sections[section];  // a section may legitimately stay empty
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            fail_validation(at + ": expected 'key = value', got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) fail_validation(at + ": empty key");
        if (section.empty())
            fail_validation(at + ": key '" + key + "' appears before any [section]");
        if (out.sections[section].count(key))
            fail_validation(at + ": duplicate key '" + section + "." + key + "'");
        out.sections[section][key] = value;
    }
    return out;
}

RunConfig config_from_text(const std::string& text, const std::string& context) {
    Reader r(parse_ini(text, context), context);
    RunConfig c;

    r.get("run", "seed", c.seed);
    r.get("run", "out", c.out_dir);
    r.get("run", "workers", c.workers);

    r.get("panel", "input", c.panel_input);
    r.get("panel", "asset_floor", c.asset_floor);
    r.get("panel", "min_firms", c.min_firms);
    std::string output = "log_q";
    r.get("panel", "output", output);
    if (output == "log_q")
        c.output = panel::OutputKind::LogQ;
    else if (output == "roa")
        c.output = panel::OutputKind::Roa;
    else
        fail_validation(r.where("panel", "output") + ": expected log_q or roa, got '" +
                        output + "'");
    r.get("panel", "winsor_fraction", c.winsor_fraction);

    for (auto& [canonical, column] : r.take_section("schema"))
        c.schema.columns[canonical] = column;
    c.schema.validate();

    std::string hidden = "16,16";
    r.get("network", "hidden", hidden);
    c.arch.sizes = {panel::kNumInputs};
    for (const auto& tok : split_list(hidden))
        c.arch.sizes.push_back(
            static_cast<int>(parse_int(tok, r.where("network", "hidden"))));
    c.arch.sizes.push_back(1);
    c.arch.validate();

    r.get("train", "epochs", c.train.epochs);
    r.get("train", "batch_size", c.train.batch_size);
    r.get("train", "learning_rate", c.train.learning_rate);
    r.get("train", "beta1", c.train.beta1);
    r.get("train", "beta2", c.train.beta2);
    r.get("train", "adam_eps", c.train.adam_eps);
    r.get("train", "patience", c.train.patience);

    r.get("distance", "holdout_fraction", c.holdout_fraction);
    std::string conv = "rmse";
    r.get("distance", "convention", conv);
    if (conv == "rmse")
        c.convention = distance::Convention::Rmse;
    else if (conv == "mse")
        c.convention = distance::Convention::Mse;
    else
        fail_validation(r.where("distance", "convention") +
                        ": expected rmse or mse, got '" + conv + "'");

    r.get("stylized", "sigma", c.stylized_sigma);
    r.get("stylized", "n", c.stylized_n);
    r.get("stylized", "tolerance", c.stylized_tolerance);

    auto& s = c.synthetic;
    r.get("synthetic", "industries", s.industries);
    r.get("synthetic", "first_year", s.first_year);
    r.get("synthetic", "years", s.years);
    r.get("synthetic", "dist_mu", s.dist_mu);
    r.get("synthetic", "dist_sd", s.dist_sd);
    r.get("synthetic", "tf_scale", s.tf_scale);
    r.get("synthetic", "tf_noise_sd", s.tf_noise_sd);
    r.get("synthetic", "lambda0", s.lambda0);
    r.get("synthetic", "gamma_count", s.gamma_count);
    r.get("synthetic", "gamma_tf_resid", s.gamma_tf_resid);
    r.get("synthetic", "gamma_interaction", s.gamma_interaction);
    r.get("synthetic", "pair_noise_sd", s.pair_noise_sd);
    r.get("synthetic", "year_effect_sd", s.year_effect_sd);
    r.get("synthetic", "industry_effect_sd", s.industry_effect_sd);
    r.get("synthetic", "completion_intercept", s.completion_intercept);
    r.get("synthetic", "completion_dist", s.completion_dist);
    r.get("synthetic", "survival1_intercept", s.survival1_intercept);
    r.get("synthetic", "survival1_dist", s.survival1_dist);
    r.get("synthetic", "survival2_intercept", s.survival2_intercept);
    r.get("synthetic", "survival2_dist", s.survival2_dist);
    r.get("synthetic", "car_intercept", s.car_intercept);
    r.get("synthetic", "car_dist", s.car_dist);
    r.get("synthetic", "car_noise_sd", s.car_noise_sd);
    r.get("synthetic", "with_deals", s.with_deals);
    r.get("synthetic", "firm_panel", c.synthetic_firm_panel);
    r.get("synthetic", "panel_industries", c.firm_panel.industries);
    r.get("synthetic", "panel_first_year", c.firm_panel.first_year);
    r.get("synthetic", "panel_years", c.firm_panel.years);
    r.get("synthetic", "firms_per_industry", c.firm_panel.firms_per_industry);
    r.get("synthetic", "panel_noise_sd", c.firm_panel.noise_sd);

    r.get("regress", "counts", c.counts_path);
    r.get("regress", "deals", c.deals_path);
    std::string batteries;
    if (r.take("regress", "batteries", batteries)) {
        c.batteries = split_list(batteries);
        if (c.batteries.empty())
            fail_validation(r.where("regress", "batteries") + ": empty battery list");
    }

    r.get("report", "distances", c.distances_path);

    r.finish({"run", "panel", "schema", "network", "train", "distance", "stylized",
              "synthetic", "regress", "report"});

    // Value sanity beyond type checks.
    if (c.workers < 1) fail_validation("run.workers must be >= 1");
    if (c.min_firms < 2) fail_validation("panel.min_firms must be >= 2");
    if (c.winsor_fraction < 0 || c.winsor_fraction >= 0.5)
        fail_validation("panel.winsor_fraction must be in [0, 0.5)");
    c.train.validate();
    if (c.holdout_fraction < 0 || c.holdout_fraction >= 1)
        fail_validation("distance.holdout_fraction must be in [0, 1)");
    if (c.stylized_sigma < 0) fail_validation("stylized.sigma must be >= 0");
    if (c.stylized_n < 1) fail_validation("stylized.n must be >= 1");
    if (c.stylized_tolerance <= 0) fail_validation("stylized.tolerance must be > 0");

    c.train.seed = c.seed;
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_validation("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_text(buf.str(), path);
}

std::string RunConfig::resolved_text() const {
    std::string t;
    auto kv = [&t](const std::string& k, const std::string& v) {
        t += k + " = " + v + "\n";
    };

    t += "[run]\n";
    kv("out", out_dir);
    kv("seed", std::to_string(seed));  // unsigned: keeps the full 64-bit range
    kv("workers", format_int(workers));

    t += "\n[panel]\n";
    kv("asset_floor", format_double(asset_floor));
    kv("input", panel_input);
    kv("min_firms", format_int(min_firms));
    kv("output", output == panel::OutputKind::LogQ ? "log_q" : "roa");
    kv("winsor_fraction", format_double(winsor_fraction));

    t += "\n[schema]\n";
    for (const auto& [canonical, column] : schema.columns) kv(canonical, column);

    t += "\n[network]\n";
    std::string hidden;
    for (std::size_t i = 1; i + 1 < arch.sizes.size(); ++i) {
        if (!hidden.empty()) hidden += ",";
        hidden += format_int(arch.sizes[i]);
    }
    kv("hidden", hidden);

    t += "\n[train]\n";
    kv("adam_eps", format_double(train.adam_eps));
    kv("batch_size", format_int(train.batch_size));
    kv("beta1", format_double(train.beta1));
    kv("beta2", format_double(train.beta2));
    kv("epochs", format_int(train.epochs));
    kv("learning_rate", format_double(train.learning_rate));
    kv("patience", format_int(train.patience));

    t += "\n[distance]\n";
    kv("convention", convention == distance::Convention::Rmse ? "rmse" : "mse");
    kv("holdout_fraction", format_double(holdout_fraction));

    t += "\n[stylized]\n";
    kv("n", format_int(stylized_n));
    kv("sigma", format_double(stylized_sigma));
    kv("tolerance", format_double(stylized_tolerance));

    t += "\n[synthetic]\n";
    kv("car_dist", format_double(synthetic.car_dist));
    kv("car_intercept", format_double(synthetic.car_intercept));
    kv("car_noise_sd", format_double(synthetic.car_noise_sd));
    kv("completion_dist", format_double(synthetic.completion_dist));
    kv("completion_intercept", format_double(synthetic.completion_intercept));
    kv("dist_mu", format_double(synthetic.dist_mu));
    kv("dist_sd", format_double(synthetic.dist_sd));
    kv("firm_panel", bool_str(synthetic_firm_panel));
    kv("firms_per_industry", format_int(firm_panel.firms_per_industry));
    kv("first_year", format_int(synthetic.first_year));
    kv("gamma_count", format_double(synthetic.gamma_count));
    kv("gamma_interaction", format_double(synthetic.gamma_interaction));
    kv("gamma_tf_resid", format_double(synthetic.gamma_tf_resid));
    kv("industries", format_int(synthetic.industries));
    kv("industry_effect_sd", format_double(synthetic.industry_effect_sd));
    kv("lambda0", format_double(synthetic.lambda0));
    kv("pair_noise_sd", format_double(synthetic.pair_noise_sd));
    kv("panel_first_year", format_int(firm_panel.first_year));
    kv("panel_industries", format_int(firm_panel.industries));
    kv("panel_noise_sd", format_double(firm_panel.noise_sd));
    kv("panel_years", format_int(firm_panel.years));
    kv("survival1_dist", format_double(synthetic.survival1_dist));
    kv("survival1_intercept", format_double(synthetic.survival1_intercept));
    kv("survival2_dist", format_double(synthetic.survival2_dist));
    kv("survival2_intercept", format_double(synthetic.survival2_intercept));
    kv("tf_noise_sd", format_double(synthetic.tf_noise_sd));
    kv("tf_scale", format_double(synthetic.tf_scale));
    kv("with_deals", bool_str(synthetic.with_deals));
    kv("year_effect_sd", format_double(synthetic.year_effect_sd));
    kv("years", format_int(synthetic.years));

    t += "\n[regress]\n";
    std::string blist;
    for (const auto& b : batteries) {
        if (!blist.empty()) blist += ",";
        blist += b;
    }
    kv("batteries", blist);
    kv("counts", counts_path);
    kv("deals", deals_path);

    t += "\n[report]\n";
    kv("distances", distances_path);
    return t;
}

}  // namespace funcdist::config
