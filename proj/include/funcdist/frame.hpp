#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "funcdist/csv.hpp"

namespace funcdist::econ {

// Column-oriented numeric table keyed by name.
class DataFrame {
public:
    Eigen::Index rows() const { return cols_.empty() ? 0 : cols_.front().size(); }
    std::size_t width() const { return cols_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    bool has(const std::string& name) const;
    const Eigen::VectorXd& col(const std::string& name) const;  // throws when absent
    void add(const std::string& name, Eigen::VectorXd values);

    // Rows where col(name) == value.
    DataFrame where_equal(const std::string& name, double value) const;

    static DataFrame from_csv(const CsvTable& table, const std::string& context);
    CsvTable to_csv() const;

private:
    std::vector<std::string> names_;
    std::vector<Eigen::VectorXd> cols_;
};

enum class Model { Ols, Probit };

struct RegressionSpec {
    std::string label;
    Model model = Model::Ols;
    std::string dependent;
    std::vector<std::string> regressors;
    // Categorical columns: absorbed by within-transformation for OLS,
    // expanded into explicit dummies (first level dropped) for probit.
    std::vector<std::string> fixed_effects;
    std::string cluster;  // empty = classical covariance
};

struct Term {
    std::string name;
    double coef = 0;
    double se = 0;
    double t = 0;
    double p = 1;
    std::string stars;  // significance at 10/5/1%: * ** ***
    // Probit only: average marginal effect and its delta-method SE.
    double ame = std::numeric_limits<double>::quiet_NaN();
    double ame_se = std::numeric_limits<double>::quiet_NaN();
};

struct RegressionResult {
    std::string label;
    Model model = Model::Ols;
    std::vector<Term> terms;  // intercept + named regressors (FE terms omitted)
    long long n = 0;
    int n_clusters = 0;  // 0 = classical
    double df_t = 0;     // degrees of freedom behind the p-values
    double r2 = std::numeric_limits<double>::quiet_NaN();
    double pseudo_r2 = std::numeric_limits<double>::quiet_NaN();
};

std::string significance_stars(double p);

}  // namespace funcdist::econ
