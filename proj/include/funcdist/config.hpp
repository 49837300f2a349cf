#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "funcdist/distance.hpp"
#include "funcdist/neural.hpp"
#include "funcdist/panel.hpp"
#include "funcdist/synthetic.hpp"

namespace funcdist::config {

// INI-style sections of key = value pairs. '#' or ';' starts a comment.
struct IniMap {
    std::map<std::string, std::map<std::string, std::string>> sections;
};

IniMap parse_ini(const std::string& text, const std::string& context);

// Fully resolved run settings. Every key has a default; unknown keys are
// rejected so typos cannot silently fall back to defaults.
struct RunConfig {
    // [run]
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int workers = 1;

    // [panel]
    std::string panel_input;
    double asset_floor = 10.0;
    int min_firms = 30;
    panel::OutputKind output = panel::OutputKind::LogQ;
    double winsor_fraction = 0.0;
    panel::Schema schema = panel::Schema::defaults();

    // [network] + [train]
    neural::Architecture arch = neural::Architecture::default_arch();
    neural::TrainConfig train;

    // [distance]
    double holdout_fraction = 0.0;
    distance::Convention convention = distance::Convention::Rmse;

    // [stylized]
    double stylized_sigma = 0.1;
    long long stylized_n = 200000;
    double stylized_tolerance = 0.01;

    // [synthetic]
    econ::SyntheticParams synthetic;
    bool synthetic_firm_panel = false;
    econ::FirmPanelParams firm_panel;

    // [regress] / [report]
    std::string counts_path;
    std::string deals_path;
    std::string distances_path;
    std::vector<std::string> batteries = {"auto"};

    // The configuration actually in force (defaults merged with the file and
    // command-line overrides), serializable for reproducibility.
    std::string resolved_text() const;
};

RunConfig load_config(const std::string& path);
RunConfig config_from_text(const std::string& text, const std::string& context);

}  // namespace funcdist::config
