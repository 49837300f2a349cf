#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "funcdist/frame.hpp"

namespace funcdist::econ {

// ------------------------------------------------------------ special fn

double norm_pdf(double x);
double norm_cdf(double x);
// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
// Two-sided p-value for a t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// ------------------------------------------------------------ estimators

// OLS with absorbed fixed effects (within transformation, grand mean added
// back so the intercept is meaningful). Coefficients match explicit dummy
// OLS; covariance is classical or the year-style cluster sandwich
//   (G/(G-1)) ((N-1)/(N-K)) (X'X)^-1 [sum_g (X_g'u_g)(X_g'u_g)'] (X'X)^-1
// with K counting intercept, slopes, and absorbed dummy df.
RegressionResult ols_fe(const DataFrame& df, const RegressionSpec& spec);

// Same fit, also exposing residuals (original-scale, equal to the dummy-model
// residuals) for orthogonalization.
struct OlsFit {
    RegressionResult result;
    Eigen::VectorXd residuals;
};
OlsFit ols_fe_fit(const DataFrame& df, const RegressionSpec& spec);

// Probit MLE via Newton-Raphson with analytic score and Hessian; at most 100
// iterations, convergence when max |score| < 1e-8, step-halving on likelihood
// decreases. Fixed effects enter as explicit dummies. Reports average
// marginal effects (discrete 0->1 differences for indicator regressors) with
// delta-method SEs.
RegressionResult probit_fit(const DataFrame& df, const RegressionSpec& spec);

// Residuals of target regressed on conditioning variables plus absorbed
// fixed effects.
Eigen::VectorXd orthogonalize(const DataFrame& df, const std::string& target,
                              const std::vector<std::string>& conditioning,
                              const std::vector<std::string>& fixed_effects);

// ------------------------------------------------------------ event study

struct CarConfig {
    int est_window = 250;  // trading days in the market-model window
    int gap = 30;          // window ends this many days before the event
    int min_obs = 60;
    int event_start = -1;  // CAR window relative to the event day
    int event_end = 1;
};

// Market-model cumulative abnormal return around event_index.
double market_model_car(std::span<const double> stock, std::span<const double> market,
                        int event_index, const CarConfig& cfg = {});

// Weighted mean of per-deal CARs; pass unit weights for equal weighting.
double combine_car(std::span<const double> cars, std::span<const double> weights);

struct Correlation {
    double r = 0;
    double p = 1;
    long long n = 0;
};
// Pearson correlation with the t-transform p-value.
Correlation correlation(std::span<const double> x, std::span<const double> y);

}  // namespace funcdist::econ
