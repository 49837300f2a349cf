#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "funcdist/numio.hpp"

namespace funcdist {

// Deterministic RNG. mt19937_64 supplies bits; the real-valued mappings are
// pinned here (53-bit uniform, Box-Muller normal, product-form Poisson)
// instead of <random> distributions, whose outputs are implementation
// defined and would break cross-toolchain reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1).
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller with a cached spare draw.
    double normal(double mu = 0.0, double sigma = 1.0);

    // Exact Poisson: infinitely-divisible split keeps the Knuth product in
    // range for large means.
    long long poisson(double lambda);

    // Fisher-Yates over an index container.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(gen_() % i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Bernoulli(p).
    bool bernoulli(double p) { return uniform01() < p; }

    Rng child(std::string_view tag) const { return Rng(child_seed(seed_, tag)); }

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace funcdist
