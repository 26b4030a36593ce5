#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <string>

#include "levin/oracle.hpp"
#include "levin/problems.hpp"
#include "levin/session.hpp"

using namespace levin;

namespace {

std::function<double(double)> tutorial(double y, double p) {
    return [y, p](double x) { return std::pow(x, p * y) + x * x + x; };
}

IntegrandTable tutorial_table(double p) {
    const std::vector<double> y{1.0, 2.0};
    return tabulate({tutorial(y[0], p), tutorial(y[1], p)}, 1e-5, 100.0, 100, true, true);
}

BatchRequest single_request(const std::vector<double>& ks, int ell, double a, double b) {
    BatchRequest r;
    r.a.assign(ks.size(), a);
    r.b.assign(ks.size(), b);
    r.k = {ks};
    r.ell = {std::vector<int>(ks.size(), ell)};
    return r;
}

bool bitwise_equal(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           std::memcmp(x.data(), y.data(), sizeof(double) * static_cast<std::size_t>(x.size())) == 0;
}

std::string message_of(Session& s, const BatchRequest& r) {
    try {
        (void)s.integrate_batch(r);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("integral type codes") {
    CHECK(integral_type_from_code(0) == IntegralType::SingleSpherical);
    CHECK(integral_type_from_code(5) == IntegralType::TripleCylindrical);
    CHECK_THROWS_AS(integral_type_from_code(6), std::invalid_argument);
    CHECK_THROWS_AS(integral_type_from_code(-1), std::invalid_argument);
    for (int c = 0; c < 6; ++c) {
        const OscillatorKind kind = oscillator_kind(integral_type_from_code(c));
        CHECK(kind.count == c / 2 + 1);
        CHECK((kind.family == BesselFamily::Spherical) == (c % 2 == 0));
    }
}

TEST_CASE("construction") {
    Session s(IntegralType::SingleSpherical, tutorial_table(3.0));
    CHECK(s.cache_size() == 0);
    CHECK(s.n_integrands() == 2);
    const std::vector<double> x{1.0, 2.0, 3.0};
    CHECK_THROWS(Session(IntegralType::SingleSpherical, IntegrandTable(x, Eigen::MatrixXd::Ones(3, 1), false, false)));
}

TEST_CASE("zero integrand") {
    Session s(IntegralType::SingleSpherical, tabulate({[](double) { return 0.0; }}, 1.0, 10.0, 20, false, false));
    const BatchResult r = s.integrate_batch(single_request({2.0}, 3, 1.0, 10.0));
    CHECK(r.values(0, 0) == 0.0);
    CHECK(r.converged(0, 0));
}

TEST_CASE("request validation names the entry") {
    Session s(IntegralType::DoubleSpherical, tutorial_table(3.0));
    BatchRequest r;
    r.a = {1e-3, 1e-3, 1e-3};
    r.b = {1.0, 1.0, 1.0};
    r.k = {{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}};
    r.ell = {{0, 1, 2}, {0, 1, 2}};
    CHECK(message_of(s, r).empty());

    BatchRequest bad = r;
    bad.b[2] = 1e-4;
    CHECK(message_of(s, bad).find("batch entry 2") != std::string::npos);
    bad = r;
    bad.k[1].pop_back();
    CHECK(message_of(s, bad).find("k2 has length 2") != std::string::npos);
    bad = r;
    bad.k.pop_back();
    CHECK_FALSE(message_of(s, bad).empty());
    bad = r;
    bad.b[1] = 200.0;
    CHECK(message_of(s, bad).find("batch entry 1") != std::string::npos);
    bad = r;
    bad.k[0][0] = -1.0;
    CHECK(message_of(s, bad).find("batch entry 0: k1") != std::string::npos);
    bad = r;
    bad.ell[1][2] = -2;
    CHECK(message_of(s, bad).find("batch entry 2: ell2") != std::string::npos);
    bad = r;
    bad.diagonal = true;
    CHECK(message_of(s, bad).find("diagonal") != std::string::npos);
    bad = BatchRequest{};
    CHECK(message_of(s, bad) == "empty batch");
}

TEST_CASE("tutorial batch") {
    Session s(IntegralType::SingleSpherical, tutorial_table(3.0));
    const std::vector<double> ks = log_space(1e-3, 1e4, 1000);
    const BatchResult r = s.integrate_batch(single_request(ks, 5, 1e-5, 100.0));
    REQUIRE(r.values.rows() == 1000);
    REQUIRE(r.values.cols() == 2);
    CHECK(r.values.allFinite());
    CHECK(r.all_converged());
    for (std::size_t m = 0; m < 20; ++m) {
        const IntegralSpec spec{{BesselFamily::Spherical, 1}, {{5}, {ks[m]}}, 1e-5, 100.0};
        for (std::size_t c = 0; c < 2; ++c) {
            const OracleResult o = quad_reference(spec, s.interpolant(), c);
            REQUIRE(o.converged);
            CAPTURE(ks[m]);
            CHECK(std::abs(r.values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c)) / o.value - 1.0) <
                  1e-3);
        }
    }
}

TEST_CASE("diagonal mode") {
    Session s(IntegralType::SingleSpherical, tutorial_table(3.0));
    BatchRequest r = single_request({0.5, 20.0}, 5, 1e-5, 100.0);
    const BatchResult full = s.integrate_batch(r);
    r.diagonal = true;
    const BatchResult diag = s.integrate_batch(r);
    REQUIRE(diag.values.cols() == 1);
    CHECK(std::memcmp(&diag.values(0, 0), &full.values(0, 0), sizeof(double)) == 0);
    CHECK(std::memcmp(&diag.values(1, 0), &full.values(1, 1), sizeof(double)) == 0);
}

TEST_CASE("integrand updates") {
    const std::vector<double> y{1.0, 2.0};
    const IntegrandTable t = tabulate({tutorial(y[0], 3.0), tutorial(y[1], 3.0)}, 1e-5, 100.0, 100, true, false);
    Session s(IntegralType::SingleSpherical, t);
    const BatchRequest r = single_request(log_space(0.1, 100.0, 12), 5, 1e-5, 100.0);
    const BatchResult first = s.integrate_batch(r);
    CHECK(s.last_stats().factorizations > 0);
    CHECK(s.cache_size() == 12);

    s.update_integrand(t.values());
    const BatchResult same = s.integrate_batch(r);
    CHECK(bitwise_equal(same.values, first.values));
    CHECK(s.last_stats().factorizations == 0);
    CHECK(s.last_stats().warm_columns == 24);

    s.update_integrand(Eigen::MatrixXd(4.0 * t.values()));
    const BatchResult scaled = s.integrate_batch(r);
    CHECK(bitwise_equal(scaled.values, Eigen::MatrixXd(4.0 * first.values)));

    CHECK_THROWS_AS(s.update_integrand(Eigen::MatrixXd::Ones(100, 3)), std::invalid_argument);
    CHECK_THROWS_AS(s.update_integrand(tutorial_table(2.5)), std::invalid_argument);
    CHECK_THROWS_AS(s.update_integrand(tabulate({tutorial(1.0, 3.0), tutorial(2.0, 3.0)}, 1e-5, 100.0, 101, true, false)),
                    std::invalid_argument);
    CHECK(s.cache_size() == 12);
    (void)s.integrate_batch(r);
    CHECK(s.last_stats().factorizations == 0);

    s.set_levin(LevinSettings{});
    CHECK(s.cache_size() == 0);
}

TEST_CASE("tutorial swap on frozen trees") {
    const IntegrandTable t0 = tutorial_table(3.0);
    const IntegrandTable t1 = tutorial_table(2.5);
    Session s(IntegralType::SingleSpherical, t0);
    const BatchRequest r = single_request(log_space(1e-3, 1e4, 200), 5, 1e-5, 100.0);
    (void)s.integrate_batch(r);
    s.update_integrand(t1.values());
    const BatchResult warm = s.integrate_batch(r);
    Session fresh(IntegralType::SingleSpherical, t1);
    const BatchResult cold = fresh.integrate_batch(r);
    for (Eigen::Index m = 0; m < warm.values.rows(); ++m) {
        for (Eigen::Index c = 0; c < 2; ++c) {
            if (warm.converged(m, c)) {
                CHECK(std::abs(warm.values(m, c) / cold.values(m, c) - 1.0) <= s.settings().rel_acc);
            }
        }
    }
}

TEST_CASE("batch equals single-tuple calls") {
    Session batch(IntegralType::SingleSpherical, tutorial_table(3.0));
    const std::vector<double> ks = log_space(0.01, 1000.0, 15);
    const BatchResult all = batch.integrate_batch(single_request(ks, 5, 1e-5, 100.0));
    Session loop(IntegralType::SingleSpherical, tutorial_table(3.0));
    for (std::size_t m = 0; m < ks.size(); ++m) {
        const BatchResult one = loop.integrate_batch(single_request({ks[m]}, 5, 1e-5, 100.0));
        CHECK(bitwise_equal(one.values, all.values.row(static_cast<Eigen::Index>(m))));
    }
}

TEST_CASE("repeated tuples share one tree") {
    Session s(IntegralType::SingleSpherical, tutorial_table(3.0));
    const BatchResult r = s.integrate_batch(single_request({3.0, 3.0, 7.0}, 5, 1e-5, 100.0));
    CHECK(s.last_stats().unique_tuples == 2);
    CHECK(s.cache_size() == 2);
    CHECK(bitwise_equal(r.values.row(0), r.values.row(1)));
}

TEST_CASE("worker count does not change results") {
    const BatchRequest r = single_request(log_space(0.01, 1000.0, 40), 5, 1e-5, 100.0);
    Session one(IntegralType::SingleSpherical, tutorial_table(3.0));
    Session four(IntegralType::SingleSpherical, tutorial_table(3.0));
    four.set_threads(4);
    CHECK(bitwise_equal(one.integrate_batch(r).values, four.integrate_batch(r).values));
    CHECK_THROWS_AS(four.set_threads(0), std::invalid_argument);
}

TEST_CASE("positional settings") {
    Session s(IntegralType::SingleSpherical, tutorial_table(3.0));
    s.set_levin(8, 16, 1e-6, true, false);
    CHECK(s.settings().n_sub == 8);
    CHECK(s.settings().max_bisections == 16);
    CHECK(s.settings().rel_acc == 1e-6);
    CHECK_THROWS(s.set_levin(7, 16, 1e-6, false, false));
}
