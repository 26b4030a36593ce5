#include "levin/quadrature.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

namespace levin {

namespace {

QuadratureRule compute_gauss_legendre(int n) {
    QuadratureRule rule;
    if (n == 1) {
        rule.nodes = {0.0};
        rule.weights = {2.0};
        return rule;
    }
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n from the Tricomi initial guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // refresh the derivative at the converged root
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[n / 2] = 0.0;
    }
    return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
    if (n < 1) {
        throw std::invalid_argument("gauss_legendre: n must be positive, got " + std::to_string(n));
    }
    thread_local std::map<int, QuadratureRule> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, compute_gauss_legendre(n)).first;
    }
    return it->second;
}

}  // namespace levin
