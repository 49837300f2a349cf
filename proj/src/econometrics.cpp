#include "funcdist/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "funcdist/error.hpp"
#include "funcdist/numio.hpp"

namespace funcdist::econ {

// --------------------------------------------------------- special fn

double norm_pdf(double x) { return std::exp(-0.5 * x * x) * 0.3989422804014327; }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0)) fail_validation("incomplete_beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (!(df > 0)) fail_validation("student_t_two_sided_p: df must be positive");
    const double x = df / (df + t * t);
    return incomplete_beta(df / 2.0, 0.5, x);
}

// --------------------------------------------------------- OLS machinery

namespace {

struct Groups {
    std::vector<int> labels;  // group index per row
    int count = 0;
};

Groups group_rows(const Eigen::VectorXd& key) {
    Groups g;
    std::map<double, int> ids;
    g.labels.resize(static_cast<std::size_t>(key.size()));
    for (Eigen::Index i = 0; i < key.size(); ++i) {
        auto [it, inserted] = ids.try_emplace(key(i), g.count);
        if (inserted) ++g.count;
        g.labels[static_cast<std::size_t>(i)] = it->second;
    }
    return g;
}

// One within-demeaning pass over a column for one grouping.
void demean_pass(Eigen::VectorXd& v, const Groups& g) {
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(g.count);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(g.count);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        sums(g.labels[static_cast<std::size_t>(i)]) += v(i);
        counts(g.labels[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) -= sums(g.labels[static_cast<std::size_t>(i)]) /
                counts(g.labels[static_cast<std::size_t>(i)]);
}

// Alternating projection onto the joint fixed-effect space; the grand mean
// is added back so a constant column stays meaningful.
void absorb(Eigen::VectorXd& v, const std::vector<Groups>& groups) {
    if (groups.empty()) return;
    const double grand = v.mean();
    if (groups.size() == 1) {
        demean_pass(v, groups[0]);
    } else {
        constexpr int kMaxSweeps = 500;
        constexpr double kTol = 1e-11;
        for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
            Eigen::VectorXd before = v;
            for (const auto& g : groups) demean_pass(v, g);
            if ((v - before).cwiseAbs().maxCoeff() < kTol) break;
        }
    }
    v.array() += grand;
}

struct Design {
    Eigen::MatrixXd X;              // intercept + regressors, absorbed
    Eigen::VectorXd y;              // absorbed
    Eigen::VectorXd y_raw;
    std::vector<std::string> term_names;
    std::vector<Groups> fe;
    long long absorbed_df = 0;
    Groups clusters;                // count 0 when classical
};

Design build_ols_design(const DataFrame& df, const RegressionSpec& spec) {
    if (df.rows() < 1) fail_validation("ols_fe: empty frame");
    Design d;
    d.y_raw = df.col(spec.dependent);
    d.y = d.y_raw;

    const auto n = df.rows();
    const auto k = static_cast<Eigen::Index>(spec.regressors.size()) + 1;
    d.X.resize(n, k);
    d.X.col(0).setOnes();
    d.term_names.push_back("intercept");
    for (std::size_t j = 0; j < spec.regressors.size(); ++j) {
        d.X.col(static_cast<Eigen::Index>(j) + 1) = df.col(spec.regressors[j]);
        d.term_names.push_back(spec.regressors[j]);
    }

    for (const auto& fe_col : spec.fixed_effects) {
        Groups g = group_rows(df.col(fe_col));
        d.absorbed_df += g.count - 1;
        d.fe.push_back(std::move(g));
    }
    if (!d.fe.empty()) {
        absorb(d.y, d.fe);
        for (Eigen::Index c = 1; c < k; ++c) {
            Eigen::VectorXd col = d.X.col(c);
            absorb(col, d.fe);
            d.X.col(c) = col;
        }
    }

    if (!spec.cluster.empty()) {
        d.clusters = group_rows(df.col(spec.cluster));
        if (d.clusters.count < 2)
            fail_estimation("ols_fe: fewer than 2 clusters in '" + spec.cluster + "'");
    }
    return d;
}

}  // namespace

OlsFit ols_fe_fit(const DataFrame& df, const RegressionSpec& spec) {
    Design d = build_ols_design(df, spec);
    const Eigen::Index n = d.X.rows();
    const Eigen::Index k = d.X.cols();
    const double K = static_cast<double>(k) + static_cast<double>(d.absorbed_df);
    if (static_cast<double>(n) <= K)
        fail_estimation("ols_fe: " + std::to_string(n) + " rows cannot identify " +
                        format_double(K) + " parameters");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
    qr.setThreshold(1e-10);
    if (qr.rank() < k)
        fail_estimation("ols_fe: collinear design after absorption (rank " +
                        std::to_string(qr.rank()) + " of " + std::to_string(k) + ")");
    const Eigen::VectorXd beta = qr.solve(d.y);
    const Eigen::VectorXd u = d.y - d.X * beta;

    const Eigen::MatrixXd xtx_inv =
        (d.X.transpose() * d.X).ldlt().solve(Eigen::MatrixXd::Identity(k, k));

    Eigen::MatrixXd V(k, k);
    double df_t = 0;
    if (d.clusters.count > 0) {
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
        std::vector<Eigen::VectorXd> scores(static_cast<std::size_t>(d.clusters.count),
                                            Eigen::VectorXd::Zero(k));
        for (Eigen::Index i = 0; i < n; ++i)
            scores[static_cast<std::size_t>(d.clusters.labels[static_cast<std::size_t>(i)])] +=
                d.X.row(i).transpose() * u(i);
        for (const auto& s : scores) meat += s * s.transpose();
        const double G = d.clusters.count;
        const double c = (G / (G - 1.0)) * ((static_cast<double>(n) - 1.0) /
                                            (static_cast<double>(n) - K));
        V = c * xtx_inv * meat * xtx_inv;
        df_t = G - 1.0;
    } else {
        const double s2 = u.squaredNorm() / (static_cast<double>(n) - K);
        V = s2 * xtx_inv;
        df_t = static_cast<double>(n) - K;
    }

    OlsFit fit;
    fit.residuals = u;
    auto& res = fit.result;
    res.label = spec.label;
    res.model = Model::Ols;
    res.n = n;
    res.n_clusters = d.clusters.count;
    res.df_t = df_t;
    const double tss = (d.y_raw.array() - d.y_raw.mean()).square().sum();
    res.r2 = tss > 0 ? 1.0 - u.squaredNorm() / tss
                     : std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index j = 0; j < k; ++j) {
        Term t;
        t.name = d.term_names[static_cast<std::size_t>(j)];
        t.coef = beta(j);
        t.se = std::sqrt(std::max(0.0, V(j, j)));
        t.t = t.se > 0 ? t.coef / t.se : 0.0;
        t.p = t.se > 0 ? student_t_two_sided_p(t.t, df_t) : 1.0;
        t.stars = significance_stars(t.p);
        res.terms.push_back(std::move(t));
    }
    return fit;
}

RegressionResult ols_fe(const DataFrame& df, const RegressionSpec& spec) {
    return ols_fe_fit(df, spec).result;
}

Eigen::VectorXd orthogonalize(const DataFrame& df, const std::string& target,
                              const std::vector<std::string>& conditioning,
                              const std::vector<std::string>& fixed_effects) {
    RegressionSpec spec;
    spec.label = "orthogonalize:" + target;
    spec.dependent = target;
    spec.regressors = conditioning;
    spec.fixed_effects = fixed_effects;
    return ols_fe_fit(df, spec).residuals;
}

// --------------------------------------------------------- probit

namespace {

struct ProbitDesign {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> term_names;
    Eigen::Index reported = 0;  // first `reported` columns appear in terms
    Groups clusters;
};

ProbitDesign build_probit_design(const DataFrame& df, const RegressionSpec& spec) {
    if (df.rows() < 1) fail_validation("probit: empty frame");
    ProbitDesign d;
    d.y = df.col(spec.dependent);
    for (Eigen::Index i = 0; i < d.y.size(); ++i)
        if (d.y(i) != 0.0 && d.y(i) != 1.0)
            fail_validation("probit: dependent '" + spec.dependent + "' must be 0/1");

    std::vector<Eigen::VectorXd> cols;
    cols.push_back(Eigen::VectorXd::Ones(df.rows()));
    d.term_names.push_back("intercept");
    for (const auto& r : spec.regressors) {
        cols.push_back(df.col(r));
        d.term_names.push_back(r);
    }
    d.reported = static_cast<Eigen::Index>(cols.size());

    // Fixed effects become explicit dummies, first level dropped.
    for (const auto& fe_col : spec.fixed_effects) {
        const Eigen::VectorXd& key = df.col(fe_col);
        std::set<double> levels(key.data(), key.data() + key.size());
        bool first = true;
        for (double lv : levels) {
            if (first) {
                first = false;
                continue;
            }
            Eigen::VectorXd dummy(df.rows());
            for (Eigen::Index i = 0; i < df.rows(); ++i) dummy(i) = key(i) == lv ? 1.0 : 0.0;
            cols.push_back(std::move(dummy));
            d.term_names.push_back(fe_col + "=" + format_double(lv));
        }
    }

    d.X.resize(df.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        d.X.col(static_cast<Eigen::Index>(c)) = cols[c];

    if (!spec.cluster.empty()) {
        d.clusters = group_rows(df.col(spec.cluster));
        if (d.clusters.count < 2)
            fail_estimation("probit: fewer than 2 clusters in '" + spec.cluster + "'");
    }
    return d;
}

double probit_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
    double ll = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double p = norm_cdf(y(i) == 1.0 ? z(i) : -z(i));
        ll += std::log(std::max(p, 1e-300));
    }
    return ll;
}

}  // namespace

RegressionResult probit_fit(const DataFrame& df, const RegressionSpec& spec) {
    ProbitDesign d = build_probit_design(df, spec);
    const Eigen::Index n = d.X.rows();
    const Eigen::Index k = d.X.cols();
    if (n <= k) fail_estimation("probit: more parameters than observations");

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd z = d.X * beta;
    double ll = probit_loglik(d.y, z);

    Eigen::VectorXd g(n);     // generalized residuals
    Eigen::VectorXd w(n);     // Hessian weights
    Eigen::MatrixXd info(k, k);
    bool converged = false;
    constexpr int kMaxIter = 100;
    constexpr double kScoreTol = 1e-8;

    for (int iter = 0; iter < kMaxIter; ++iter) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double q = d.y(i) == 1.0 ? 1.0 : -1.0;
            const double pdf = norm_pdf(z(i));
            const double cdf = std::max(norm_cdf(q * z(i)), 1e-300);
            const double lambda = q * pdf / cdf;
            g(i) = lambda;
            w(i) = lambda * (lambda + z(i));
        }
        const Eigen::VectorXd score = d.X.transpose() * g;
        if (score.cwiseAbs().maxCoeff() < kScoreTol) {
            converged = true;
            break;
        }
        info.noalias() = d.X.transpose() * w.asDiagonal() * d.X;
        const Eigen::VectorXd delta = info.ldlt().solve(score);
        if (!delta.allFinite())
            fail_estimation("probit: singular information matrix");

        double step = 1.0;
        bool improved = false;
        // Acceptance slack scales with |ll|: at large n the likelihood's own
        // rounding noise would otherwise block exact Newton steps near the
        // optimum and stall the iteration.
        const double slack = 1e-12 * (1.0 + std::abs(ll));
        for (int h = 0; h < 40; ++h) {
            const Eigen::VectorXd cand = beta + step * delta;
            const Eigen::VectorXd zc = d.X * cand;
            const double llc = probit_loglik(d.y, zc);
            if (llc >= ll - slack) {
                beta = cand;
                z = zc;
                ll = llc;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved)
            fail_estimation("probit: step-halving failed to improve the likelihood");
        if (beta.cwiseAbs().maxCoeff() > 1e4 || z.cwiseAbs().maxCoeff() > 40)
            fail_estimation("probit: diverging coefficients (perfect separation?)");
    }
    if (!converged) {
        // Final score check after the last update.
        for (Eigen::Index i = 0; i < n; ++i) {
            const double q = d.y(i) == 1.0 ? 1.0 : -1.0;
            const double cdf = std::max(norm_cdf(q * z(i)), 1e-300);
            g(i) = q * norm_pdf(z(i)) / cdf;
        }
        if ((d.X.transpose() * g).cwiseAbs().maxCoeff() >= kScoreTol)
            fail_estimation("probit: no convergence within 100 iterations");
        converged = true;
    }

    // Observed information and weights at the optimum.
    for (Eigen::Index i = 0; i < n; ++i) {
        const double q = d.y(i) == 1.0 ? 1.0 : -1.0;
        const double cdf = std::max(norm_cdf(q * z(i)), 1e-300);
        const double lambda = q * norm_pdf(z(i)) / cdf;
        g(i) = lambda;
        w(i) = lambda * (lambda + z(i));
    }
    info.noalias() = d.X.transpose() * w.asDiagonal() * d.X;
    const Eigen::MatrixXd A = info.ldlt().solve(Eigen::MatrixXd::Identity(k, k));

    Eigen::MatrixXd V;
    double df_t = 0;
    if (d.clusters.count > 0) {
        std::vector<Eigen::VectorXd> scores(static_cast<std::size_t>(d.clusters.count),
                                            Eigen::VectorXd::Zero(k));
        for (Eigen::Index i = 0; i < n; ++i)
            scores[static_cast<std::size_t>(d.clusters.labels[static_cast<std::size_t>(i)])] +=
                d.X.row(i).transpose() * g(i);
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
        for (const auto& s : scores) meat += s * s.transpose();
        const double G = d.clusters.count;
        V = (G / (G - 1.0)) * A * meat * A;
        df_t = G - 1.0;
    } else {
        V = A;
        df_t = 0;  // normal reference
    }

    RegressionResult res;
    res.label = spec.label;
    res.model = Model::Probit;
    res.n = n;
    res.n_clusters = d.clusters.count;
    res.df_t = df_t;

    // McFadden pseudo R^2 against the intercept-only model.
    const double ybar = d.y.mean();
    double ll0 = 0;
    if (ybar > 0 && ybar < 1)
        ll0 = static_cast<double>(n) *
              (ybar * std::log(ybar) + (1.0 - ybar) * std::log(1.0 - ybar));
    res.pseudo_r2 = ll0 < 0 ? 1.0 - ll / ll0 : std::numeric_limits<double>::quiet_NaN();

    auto p_value = [&](double t) {
        return df_t > 0 ? student_t_two_sided_p(t, df_t)
                        : 2.0 * (1.0 - norm_cdf(std::fabs(t)));
    };

    for (Eigen::Index j = 0; j < d.reported; ++j) {
        Term t;
        t.name = d.term_names[static_cast<std::size_t>(j)];
        t.coef = beta(j);
        t.se = std::sqrt(std::max(0.0, V(j, j)));
        t.t = t.se > 0 ? t.coef / t.se : 0.0;
        t.p = t.se > 0 ? p_value(t.t) : 1.0;
        t.stars = significance_stars(t.p);

        if (j > 0) {
            // Average marginal effect with a delta-method SE.
            const Eigen::VectorXd& xk = d.X.col(j);
            bool indicator = true;
            for (Eigen::Index i = 0; i < n && indicator; ++i)
                indicator = xk(i) == 0.0 || xk(i) == 1.0;

            double ame = 0;
            Eigen::VectorXd jac = Eigen::VectorXd::Zero(k);
            if (indicator) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double z0 = z(i) - xk(i) * beta(j);
                    const double z1 = z0 + beta(j);
                    ame += norm_cdf(z1) - norm_cdf(z0);
                    // d/dbeta of Phi(z1) - Phi(z0): x_i with col j set to 1/0.
                    jac += norm_pdf(z1) * d.X.row(i).transpose();
                    jac(j) += norm_pdf(z1) * (1.0 - xk(i));
                    jac -= norm_pdf(z0) * d.X.row(i).transpose();
                    jac(j) -= norm_pdf(z0) * (0.0 - xk(i));
                }
            } else {
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double pdf = norm_pdf(z(i));
                    ame += pdf * beta(j);
                    jac += (-z(i) * pdf) * beta(j) * d.X.row(i).transpose();
                    jac(j) += pdf;
                }
            }
            ame /= static_cast<double>(n);
            jac /= static_cast<double>(n);
            t.ame = ame;
            t.ame_se = std::sqrt(std::max(0.0, (jac.transpose() * V * jac)(0)));
        }
        res.terms.push_back(std::move(t));
    }
    return res;
}

// --------------------------------------------------------- event study

double market_model_car(std::span<const double> stock, std::span<const double> market,
                        int event_index, const CarConfig& cfg) {
    if (stock.size() != market.size())
        fail_validation("market_model_car: series lengths differ");
    const int n = static_cast<int>(stock.size());
    if (event_index < 0 || event_index >= n)
        fail_validation("market_model_car: event index out of range");

    const int est_end = event_index - cfg.gap;  // exclusive
    const int est_begin = std::max(0, est_end - cfg.est_window);
    const int m = est_end - est_begin;
    if (m < cfg.min_obs)
        fail_estimation("market_model_car: " + std::to_string(std::max(0, m)) +
                        " estimation observations, need " + std::to_string(cfg.min_obs));

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = est_begin; i < est_end; ++i) {
        sx += market[static_cast<std::size_t>(i)];
        sy += stock[static_cast<std::size_t>(i)];
        sxx += market[static_cast<std::size_t>(i)] * market[static_cast<std::size_t>(i)];
        sxy += market[static_cast<std::size_t>(i)] * stock[static_cast<std::size_t>(i)];
    }
    const double denom = sxx - sx * sx / m;
    if (!(denom > 0)) fail_estimation("market_model_car: degenerate market series");
    const double b = (sxy - sx * sy / m) / denom;
    const double a = sy / m - b * sx / m;

    const int w0 = event_index + cfg.event_start;
    const int w1 = event_index + cfg.event_end;
    if (w0 < 0 || w1 >= n)
        fail_validation("market_model_car: event window outside the series");
    double car = 0;
    for (int i = w0; i <= w1; ++i)
        car += stock[static_cast<std::size_t>(i)] -
               (a + b * market[static_cast<std::size_t>(i)]);
    return car;
}

double combine_car(std::span<const double> cars, std::span<const double> weights) {
    if (cars.size() != weights.size())
        fail_validation("combine_car: size mismatch");
    if (cars.empty()) fail_validation("combine_car: empty input");
    double num = 0, den = 0;
    for (std::size_t i = 0; i < cars.size(); ++i) {
        if (weights[i] < 0) fail_validation("combine_car: negative weight");
        num += cars[i] * weights[i];
        den += weights[i];
    }
    if (!(den > 0)) fail_validation("combine_car: zero total weight");
    return num / den;
}

Correlation correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) fail_validation("correlation: size mismatch");
    const auto n = static_cast<long long>(x.size());
    if (n < 3) fail_validation("correlation: need at least 3 observations");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0) || !(syy > 0))
        fail_estimation("correlation: zero-variance input");
    Correlation c;
    c.n = n;
    c.r = sxy / std::sqrt(sxx * syy);
    const double r2 = std::min(c.r * c.r, 1.0 - 1e-15);
    const double t = c.r * std::sqrt((static_cast<double>(n) - 2.0) / (1.0 - r2));
    c.p = student_t_two_sided_p(t, static_cast<double>(n) - 2.0);
    return c;
}

}  // namespace funcdist::econ
