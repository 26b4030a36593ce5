#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "levin/adaptive.hpp"
#include "levin/integrand.hpp"
#include "levin/session.hpp"

namespace levin {

/// A built-in benchmark integral: tabulated smooth part, oscillator and k grid.
struct Problem {
    std::string name;
    std::string description;
    IntegralType type;
    IntegrandTable table;
    LevinSettings settings;
    double a = 0.0;
    double b = 0.0;
    std::vector<int> ell;      ///< one order per Bessel factor
    std::vector<double> k;     ///< shared by every factor
    std::function<double(double)> closed_form;  ///< exact value as a function of k, or empty

    /// Tuples (a, b, k, ell) for a subset of the k grid (all of it when empty).
    [[nodiscard]] BatchRequest request(const std::vector<double>& ks = {}) const;
    [[nodiscard]] IntegralSpec spec(double k_value) const;
};

std::vector<double> log_space(double lo, double hi, std::size_t n);

/// Table of f on n log-spaced points in [lo, hi], one column per function.
IntegrandTable tabulate(const std::vector<std::function<double(double)>>& f, double lo, double hi, std::size_t n,
                        bool log_x, bool log_y);

/// Names accepted by make_problem.
const std::vector<std::string>& problem_names();

/// Builds a named problem. `k_points` overrides the default k grid size when
/// non-zero. Throws std::invalid_argument for an unknown name.
Problem make_problem(const std::string& name, std::size_t k_points = 0);

// Smooth parts and grids of the problems, shared with the tests.
double poly_eq7(double x);                ///< x^3 + x^2 + x
double gaussian_r5(double r);             ///< r^5 exp(-r^2 / 2)
double lorentz_ratio(double x);           ///< x^2 / (x^2 + 1)
/// int_0^inf x^2/(x^2+1) J_0(kx) dx = 1/k - (pi/2)(I_0(k) - L_0(k)), evaluated as
/// e^{-k}/k + int_0^{pi/2} e^{-k sin t} (cos t - 1) dt.
double lorentz_hankel(double k);
/// Leading asymptotic term of int_b^inf J_0(kx) dx for kb >> 1.
double j0_tail(double k, double b);
IntegrandTable eq6_table();               ///< gaussian_r5 on [1e-5, 30], linear y
IntegrandTable eq7_table();               ///< poly_eq7 on [1e-5, 100], log-log
LevinSettings eq6_settings();

}  // namespace levin
