#pragma once

#include <cstddef>
#include <functional>

#include "levin/adaptive.hpp"
#include "levin/integrand.hpp"

namespace levin {

struct OracleSettings {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_subintervals = 1000;

    void validate() const;
};

struct OracleResult {
    double value = 0.0;
    double error = 0.0;      ///< summed panel error estimates
    bool converged = false;  ///< error <= max(abs_tol, rel_tol * |value|) within max_subintervals
    int subintervals = 0;
};

/// Adaptive 15-point Gauss-Kronrod quadrature of g over [a, b], starting
/// from `initial_panels` equal panels and always splitting the panel with
/// the largest error estimate.
OracleResult gauss_kronrod(const std::function<double(double)>& g, double a, double b,
                           const OracleSettings& settings, int initial_panels = 1);

/// Reference value of int_a^b f(x) w_1(x) dx by direct quadrature of the
/// full oscillatory integrand. The initial partition has about one panel per
/// oscillation period, at most half of max_subintervals.
OracleResult quad_reference(const IntegralSpec& spec, const std::function<double(double)>& f,
                            const OracleSettings& settings = {});

/// Same, with f taken from one column of an interpolant.
OracleResult quad_reference(const IntegralSpec& spec, const Interpolant& interp, std::size_t column,
                            const OracleSettings& settings = {});

}  // namespace levin
