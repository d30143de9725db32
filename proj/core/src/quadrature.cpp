#include "stiga/quadrature.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace stiga {

namespace {

GaussRule compute_rule(int n) {
    GaussRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    // Newton iteration on the Legendre polynomial from Chebyshev guesses.
    for (int k = 0; k < n; ++k) {
        double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.points[n - 1 - k] = x;
        rule.weights[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1 || n > 64) {
        throw std::invalid_argument("gauss_legendre: rule size out of range");
    }
    static std::map<int, GaussRule> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

}  // namespace stiga
