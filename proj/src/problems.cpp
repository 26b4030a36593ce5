#include "levin/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "levin/oracle.hpp"

namespace levin {

namespace {

constexpr double kEq7Lo = 1e-5;
constexpr double kEq7Hi = 100.0;
constexpr std::size_t kEq7Points = 2000;

constexpr double kEq6Lo = 1e-5;
constexpr double kEq6Hi = 30.0;
constexpr std::size_t kEq6Points = 20000;

constexpr double kEq4Lo = 1e-5;
constexpr double kEq4Hi = 1e8;
constexpr std::size_t kEq4Points = 2000;

std::size_t points_or(std::size_t requested, std::size_t fallback) { return requested == 0 ? fallback : requested; }

}  // namespace

BatchRequest Problem::request(const std::vector<double>& ks) const {
    const std::vector<double>& use = ks.empty() ? k : ks;
    BatchRequest req;
    req.a.assign(use.size(), a);
    req.b.assign(use.size(), b);
    for (int order : ell) {
        req.k.push_back(use);
        req.ell.emplace_back(use.size(), order);
    }
    return req;
}

IntegralSpec Problem::spec(double k_value) const {
    IntegralSpec s;
    s.kind = oscillator_kind(type);
    s.params.orders = ell;
    s.params.freqs.assign(ell.size(), k_value);
    s.a = a;
    s.b = b;
    return s;
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
    if (n == 0) {
        return {};
    }
    if (n == 1) {
        return {lo};
    }
    std::vector<double> out(n);
    const double step = std::log(hi / lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo * std::exp(step * static_cast<double>(i));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

IntegrandTable tabulate(const std::vector<std::function<double(double)>>& f, double lo, double hi, std::size_t n,
                        bool log_x, bool log_y) {
    std::vector<double> x = log_space(lo, hi, n);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f.size()));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < f.size(); ++c) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = f[c](x[i]);
        }
    }
    return IntegrandTable(std::move(x), std::move(values), log_x, log_y);
}

double poly_eq7(double x) { return x * x * x + x * x + x; }
double gaussian_r5(double r) { return std::pow(r, 5) * std::exp(-0.5 * r * r); }
double lorentz_ratio(double x) { return x * x / (x * x + 1.0); }

IntegrandTable eq6_table() { return tabulate({gaussian_r5}, kEq6Lo, kEq6Hi, kEq6Points, true, false); }
IntegrandTable eq7_table() { return tabulate({poly_eq7}, kEq7Lo, kEq7Hi, kEq7Points, true, true); }

LevinSettings eq6_settings() {
    LevinSettings s;
    s.max_bisections = 100;
    return s;
}

const std::vector<std::string>& problem_names() {
    static const std::vector<std::string> names{"eq4", "eq6", "eq7", "eq8"};
    return names;
}

double lorentz_hankel(double k) {
    OracleSettings tight;
    tight.abs_tol = 1e-300;
    tight.rel_tol = 1e-14;
    const auto g = [k](double phi) { return std::exp(-k * std::sin(phi)) * (std::cos(phi) - 1.0); };
    return std::exp(-k) / k + gauss_kronrod(g, 0.0, 0.5 * std::numbers::pi, tight, 8).value;
}

double j0_tail(double k, double b) {
    const double z = k * b;
    return -std::sqrt(2.0 / (std::numbers::pi * z)) * std::sin(z - 0.25 * std::numbers::pi) / k;
}

Problem make_problem(const std::string& name, std::size_t k_points) {
    if (name == "eq4") {
        LevinSettings s;
        s.max_bisections = 200;
        return Problem{name,
                       "int x^2/(x^2+1) J_0(kx) dx over [1e-5, 1e8]",
                       IntegralType::SingleCylindrical,
                       tabulate({lorentz_ratio}, kEq4Lo, kEq4Hi, kEq4Points, true, true),
                       s,
                       kEq4Lo,
                       kEq4Hi,
                       {0},
                       log_space(1.0, 1e4, points_or(k_points, 500)),
                       [](double k) { return lorentz_hankel(k) - j0_tail(k, kEq4Hi); }};
    }
    if (name == "eq6") {
        return Problem{name,
                       "int r^5 exp(-r^2/2) J_4(kr) dr over [1e-5, 30]",
                       IntegralType::SingleCylindrical,
                       eq6_table(),
                       eq6_settings(),
                       kEq6Lo,
                       kEq6Hi,
                       {4},
                       log_space(1e-1, 10.0, points_or(k_points, 256)),
                       [](double k) { return std::pow(k, 4) * std::exp(-0.5 * k * k); }};
    }
    if (name == "eq7") {
        return Problem{name,
                       "int (x^3+x^2+x) j_10(kx) j_5(kx) dx over [1e-5, 100]",
                       IntegralType::DoubleSpherical,
                       eq7_table(),
                       LevinSettings{},
                       kEq7Lo,
                       kEq7Hi,
                       {10, 5},
                       log_space(1e-2, 1e3, points_or(k_points, 1000)),
                       {}};
    }
    if (name == "eq8") {
        return Problem{name,
                       "int (x^3+x^2+x) j_10(kx) j_5(kx) j_15(kx) dx over [1e-5, 100]",
                       IntegralType::TripleSpherical,
                       eq7_table(),
                       LevinSettings{},
                       kEq7Lo,
                       kEq7Hi,
                       {10, 5, 15},
                       log_space(1e-2, 1e3, points_or(k_points, 1000)),
                       {}};
    }
    throw std::invalid_argument("unknown problem '" + name + "', expected one of eq4, eq6, eq7, eq8");
}

}  // namespace levin
