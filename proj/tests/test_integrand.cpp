#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "levin/integrand.hpp"
#include "levin/problems.hpp"

using namespace levin;

namespace {

IntegrandTable power_table(double p, bool log_x, bool log_y, std::size_t n = 100) {
    return tabulate({[p](double x) { return std::pow(x, p); }}, 1e-5, 100.0, n, log_x, log_y);
}

}  // namespace

TEST_CASE("table validation") {
    Eigen::MatrixXd v(3, 1);
    v << 1, 2, 3;
    CHECK_THROWS_AS(IntegrandTable({1, 2, 3}, v, false, false), std::invalid_argument);

    Eigen::MatrixXd v4(4, 1);
    v4 << 1, 2, 3, 4;
    CHECK_THROWS_AS(IntegrandTable({1, 3, 2, 4}, v4, false, false), std::invalid_argument);
    CHECK_THROWS_AS(IntegrandTable({0, 1, 2, 3}, v4, false, false), std::invalid_argument);
    CHECK_THROWS_AS(IntegrandTable({1, 2, 3}, v4, false, false), std::invalid_argument);

    Eigen::MatrixXd neg(4, 1);
    neg << 1, 2, -3, 4;
    try {
        IntegrandTable({1, 2, 3, 4}, neg, false, true);
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
    CHECK_NOTHROW(IntegrandTable({1, 2, 3, 4}, neg, false, false));
}

TEST_CASE("constants are reproduced in every mode") {
    for (bool lx : {false, true}) {
        for (bool ly : {false, true}) {
            const IntegrandTable t = tabulate({[](double) { return 2.5; }}, 0.1, 10.0, 20, lx, ly);
            const Interpolant s(t);
            for (double x : log_space(0.1, 10.0, 57)) {
                CHECK(s(x, 0) == doctest::Approx(2.5).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("power laws are exact in log-log mode") {
    const Interpolant cube(power_table(3.0, true, true));
    double worst = 0.0;
    for (double x : log_space(1e-5, 100.0, 10000)) {
        worst = std::max(worst, std::abs(cube(x, 0) / (x * x * x) - 1.0));
    }
    CHECK(worst < 1e-12);

    const IntegrandTable t = power_table(2.5, true, true, 50);
    const Interpolant s(t);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double mid = std::sqrt(t.x()[i] * t.x()[i + 1]);
        CHECK(s(mid, 0) == doctest::Approx(std::pow(mid, 2.5)).epsilon(1e-12));
    }
}

TEST_CASE("cubic polynomial interpolation error") {
    // 100 log-spaced points give about 1.3e-5: the natural end condition
    // misrepresents the curvature of ln(x^3 + x^2 + x) at the ends.
    const Interpolant coarse(tabulate({poly_eq7}, 1e-5, 100.0, 100, true, true));
    const Interpolant fine(tabulate({poly_eq7}, 1e-5, 100.0, 2000, true, true));
    double worst_coarse = 0.0;
    double worst_fine = 0.0;
    for (double x : log_space(1e-5, 100.0, 10000)) {
        worst_coarse = std::max(worst_coarse, std::abs(coarse(x, 0) / poly_eq7(x) - 1.0));
        worst_fine = std::max(worst_fine, std::abs(fine(x, 0) / poly_eq7(x) - 1.0));
    }
    CHECK(worst_coarse < 1e-4);
    CHECK(worst_fine < 1e-6);
}

TEST_CASE("nodes and midpoints") {
    const IntegrandTable t = tabulate({poly_eq7, [](double x) { return 3.0 * x + 1.0; }}, 0.5, 4.0, 12, false, true);
    const Interpolant s(t);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto row = s.evaluate(t.x()[i]);
        CHECK(row[0] == t.values()(static_cast<Eigen::Index>(i), 0));
        CHECK(row[1] == t.values()(static_cast<Eigen::Index>(i), 1));
    }
    const IntegrandTable lin = tabulate({[](double x) { return 3.0 * x + 1.0; }}, 0.5, 4.0, 12, false, false);
    const Interpolant sl(lin);
    for (std::size_t i = 0; i + 1 < lin.size(); ++i) {
        const double mid = 0.5 * (lin.x()[i] + lin.x()[i + 1]);
        const double mean = 0.5 * (lin.values()(static_cast<Eigen::Index>(i), 0) +
                                   lin.values()(static_cast<Eigen::Index>(i + 1), 0));
        CHECK(sl(mid, 0) == doctest::Approx(mean).epsilon(1e-14));
    }
}

TEST_CASE("no extrapolation") {
    const Interpolant s(power_table(1.0, true, true));
    CHECK_THROWS_AS((void)s(1e-6, 0), std::out_of_range);
    CHECK_THROWS_AS((void)s(101.0, 0), std::out_of_range);
    CHECK_THROWS_AS((void)s(std::nan(""), 0), std::out_of_range);
    CHECK_NOTHROW((void)s(1e-5, 0));
    CHECK_NOTHROW((void)s(100.0, 0));
}

TEST_CASE("update_values keeps the grid token") {
    const IntegrandTable t = power_table(3.0, true, true);
    const IntegrandTable same = update_values(t, t.values());
    CHECK(same.grid_token() == t.grid_token());
    const IntegrandTable other = power_table(3.0, true, true);
    CHECK(other.grid_token() != t.grid_token());

    const Interpolant a(t);
    const Interpolant b(same);
    for (double x : log_space(1e-5, 100.0, 333)) {
        CHECK(a(x, 0) == b(x, 0));
    }

    CHECK_THROWS_AS(update_values(t, Eigen::MatrixXd::Ones(t.size(), 2)), std::invalid_argument);
    CHECK_THROWS_AS(update_values(t, Eigen::MatrixXd::Zero(t.size(), 1)), std::invalid_argument);
}

TEST_CASE("single integrand keeps its column dimension") {
    const IntegrandTable t = power_table(1.0, false, false, 10);
    CHECK(t.values().cols() == 1);
    CHECK(t.n_integrands() == 1);
}
