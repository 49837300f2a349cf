#include "funcdist/rng.hpp"

#include <cmath>

#include "funcdist/error.hpp"

namespace funcdist {

double Rng::normal(double mu, double sigma) {
    if (have_spare_) {
        have_spare_ = false;
        return mu + sigma * spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return mu + sigma * r * std::cos(theta);
}

long long Rng::poisson(double lambda) {
    if (lambda < 0.0 || !std::isfinite(lambda))
        fail_validation("poisson: lambda must be finite and non-negative");
    if (lambda == 0.0) return 0;
    if (lambda > 500.0) {
        // Poisson(a+b) = Poisson(a) + Poisson(b) for independent draws.
        double half = lambda * 0.5;
        long long a = poisson(half);
        return a + poisson(lambda - half);
    }
    const double limit = std::exp(-lambda);
    long long k = 0;
    double prod = uniform01();
    while (prod > limit) {
        ++k;
        prod *= uniform01();
    }
    return k;
}

}  // namespace funcdist
