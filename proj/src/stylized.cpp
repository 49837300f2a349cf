#include "funcdist/stylized.hpp"

#include <string>

#include "funcdist/error.hpp"
#include "funcdist/numio.hpp"
#include "funcdist/parallel.hpp"
#include "funcdist/rng.hpp"

namespace funcdist::stylized {

namespace {

void check_pair(int pair) {
    if (pair != 11 && pair != 12 && pair != 13)
        fail_validation("stylized pair must be one of 11, 12, 13");
}

}  // namespace

double linear_forward(const LinearWeights& w, double K, double L) {
    const double h1 = w.wK1 * K + w.wL1 * L;
    const double h2 = w.wK2 * K + w.wL2 * L;
    return w.wH1 * h1 + w.wH2 * h2;
}

LinearWeights baseline_weights() { return {1, 0, 0, 0, 1, 0}; }

LinearWeights optimal_tf_weights(int pair) {
    check_pair(pair);
    LinearWeights w = baseline_weights();
    switch (pair) {
        case 11: w.wH1 = 1.0; break;
        case 12: w.wH1 = -1.0; break;
        case 13: w.wH1 = 0.75; break;
    }
    return w;
}

double analytic_mse(int pair, double sigma, Mode mode) {
    check_pair(pair);
    if (!(sigma >= 0)) fail_validation("stylized sigma must be >= 0");
    const double s2 = sigma * sigma;
    if (mode == Mode::Unadjusted) {
        switch (pair) {
            case 11: return s2;
            case 12: return 4.0 / 3.0 + s2;
            case 13: return 1.0 / 6.0 + s2;
        }
    } else {
        switch (pair) {
            case 11: return s2;
            case 12: return s2;
            case 13: return 7.0 / 48.0 + s2;
        }
    }
    return 0;  // unreachable
}

Samples sample_group(int group, std::size_t n, double sigma, std::uint64_t seed) {
    if (group != 1 && group != 2 && group != 3)
        fail_validation("stylized group must be one of 1, 2, 3");
    if (n < 1) fail_validation("stylized sample size must be >= 1");
    if (!(sigma >= 0)) fail_validation("stylized sigma must be >= 0");

    Rng rng(child_seed(seed, "stylized/group=" + format_int(group)));
    Samples s;
    s.group = group;
    s.sigma = sigma;
    s.K.resize(n);
    s.L.resize(n);
    s.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double K = rng.uniform01();
        const double L = rng.uniform01();
        const double eps = rng.normal(0.0, sigma);
        s.K[i] = K;
        s.L[i] = L;
        switch (group) {
            case 1: s.y[i] = K + eps; break;
            case 2: s.y[i] = -K + eps; break;
            case 3: s.y[i] = L + eps; break;
        }
    }
    return s;
}

double empirical_mse(const LinearWeights& w, const Samples& s, int workers) {
    if (s.size() == 0) fail_validation("empirical_mse: empty sample");
    const double sse = transform_reduce(s.size(), workers, [&](std::size_t i) {
        const double r = linear_forward(w, s.K[i], s.L[i]) - s.y[i];
        return r * r;
    });
    return sse / static_cast<double>(s.size());
}

Dataset to_dataset(const Samples& s) {
    const auto n = static_cast<Eigen::Index>(s.size());
    Dataset ds;
    ds.X = Eigen::MatrixXd::Zero(n, 8);
    ds.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ds.X(i, 0) = s.K[static_cast<std::size_t>(i)];
        ds.X(i, 1) = s.L[static_cast<std::size_t>(i)];
        ds.y(i) = s.y[static_cast<std::size_t>(i)];
    }
    return ds;
}

}  // namespace funcdist::stylized
