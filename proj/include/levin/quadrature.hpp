#pragma once

#include <vector>

namespace levin {

/// Nodes and weights of a rule on [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes in increasing order.
/// Results are cached per thread.
const QuadratureRule& gauss_legendre(int n);

}  // namespace levin
