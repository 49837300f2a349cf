#pragma once

#include <cstdint>
#include <vector>

#include "funcdist/csv.hpp"
#include "funcdist/distance.hpp"
#include "funcdist/frame.hpp"

namespace funcdist::econ {

// Planted data-generating processes for validating the estimation stack.
// Deal counts are Poisson with log-mean
//   lambda0 + gamma_count*log(d_U) + gamma_tf_resid*r + gamma_interaction*(log(d_U)*r)
//   + year effect + acquiror/target industry effects + pair-year noise,
// where r is log(d_TF) orthogonalized on log(d_U) and the fixed effects.
// Completion, survival and announcement returns are planted linear indices
// through a probit link / plus Gaussian noise.
struct SyntheticParams {
    int industries = 12;
    int first_year = 1990;
    int years = 32;

    // Distance panel: log d_U = |N(mu, sd)| off-diagonal, 0 on the diagonal;
    // log d_TF = tf_scale * log d_U + N(0, tf_noise_sd), floored at 0.
    double dist_mu = 0.22;
    double dist_sd = 0.18;
    double tf_scale = 0.75;
    double tf_noise_sd = 0.05;

    // Deal-count intensity.
    double lambda0 = 5.0;
    double gamma_count = -3.0;
    double gamma_tf_resid = 0.0;
    double gamma_interaction = 0.0;
    double pair_noise_sd = 0.3;
    double year_effect_sd = 0.2;
    double industry_effect_sd = 0.2;

    // Completion probit index.
    double completion_intercept = 1.0;
    double completion_dist = -0.8;

    // Post-merger survival probit indices.
    double survival1_intercept = 0.8;
    double survival1_dist = -0.6;
    double survival2_intercept = 0.4;
    double survival2_dist = -0.5;

    // Announcement return.
    double car_intercept = 0.02;
    double car_dist = -0.05;
    double car_noise_sd = 0.08;

    bool with_deals = true;  // deal-level table in addition to pair-year counts
};

// A synthetic distance panel shaped like the trained-network output.
std::vector<distance::DistanceMatrix> gen_synthetic_distances(const SyntheticParams& p,
                                                              std::uint64_t seed);

struct SyntheticPanels {
    DataFrame counts;  // one row per (acq industry, tgt industry, year)
    DataFrame deals;   // one row per deal; empty when with_deals is false
};

// Plants outcomes on an existing distance panel (trained or synthetic).
SyntheticPanels generate_synthetic_deals(
    const std::vector<distance::DistanceMatrix>& distances, const SyntheticParams& p,
    std::uint64_t seed);

// Synthetic firm panel whose industries follow distinct nonlinear production
// functions (a random small network per industry), emitted in the raw-field
// layout the panel loader expects. Some rows intentionally fall below the
// asset floor or have non-positive Tobin's Q so the filters are exercised.
struct FirmPanelParams {
    int industries = 12;
    int first_year = 2000;
    int years = 1;
    int firms_per_industry = 60;
    double noise_sd = 0.1;  // output noise on log Q / ROA
};

CsvTable gen_firm_panel(const FirmPanelParams& p, std::uint64_t seed);

}  // namespace funcdist::econ
