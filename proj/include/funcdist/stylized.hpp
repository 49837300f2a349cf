#pragma once

#include <cstdint>
#include <vector>

#include "funcdist/dataset.hpp"

namespace funcdist::stylized {

// Two-factor, three-node linear economy used as a closed-form oracle for
// the distance pipeline: h1 = wK1*K + wL1*L, h2 = wK2*K + wL2*L,
// yhat = wH1*h1 + wH2*h2, with K, L ~ U(0,1) and additive N(0, sigma^2)
// output noise. Groups: y1 = K + e, y2 = -K + e, y3 = L + e.
struct LinearWeights {
    double wK1 = 0, wK2 = 0, wL1 = 0, wL2 = 0, wH1 = 0, wH2 = 0;
};

enum class Mode {
    Unadjusted,  // group-1 optimal model applied as-is
    Transfer,    // first layer fixed, output layer set to the constrained optimum
};

struct Samples {
    int group = 0;
    double sigma = 0.0;
    std::vector<double> K, L, y;

    std::size_t size() const { return y.size(); }
};

double linear_forward(const LinearWeights& w, double K, double L);

// The group-1 optimum yhat = K.
LinearWeights baseline_weights();

// Constrained optimum when only the output layer may move and the first
// layer stays at baseline (so yhat = wH1 * K): pair 11 -> wH1 = 1,
// pair 12 -> wH1 = -1, pair 13 -> wH1 = E[KL]/E[K^2] = 3/4.
LinearWeights optimal_tf_weights(int pair);

// Closed-form expected MSE for pair in {11, 12, 13}. Moments: E[K^2] =
// E[L^2] = 1/3, E[K] = E[L] = 1/2, K independent of L.
//   Unadjusted: sigma^2 | E[(2K)^2] + sigma^2 = 4/3 + sigma^2
//             | E[(K-L)^2] + sigma^2 = 1/6 + sigma^2
//   Transfer:   sigma^2 | sigma^2 | E[L^2] - E[KL]^2/E[K^2] + sigma^2
//             = 7/48 + sigma^2
double analytic_mse(int pair, double sigma, Mode mode);

Samples sample_group(int group, std::size_t n, double sigma, std::uint64_t seed);

// Mean over samples of (linear_forward - y)^2, deterministic chunked sum.
double empirical_mse(const LinearWeights& w, const Samples& s, int workers = 1);

// Pads (K, L) to the 8-input layout of the production networks: columns
// (K, L, 0, 0, 0, 0, 0, 0).
Dataset to_dataset(const Samples& s);

}  // namespace funcdist::stylized
