#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "levin/collocation.hpp"
#include "levin/oracle.hpp"
#include "levin/reference.hpp"
#include "levin/selftest.hpp"

using namespace levin;

namespace {

const OscillatorKind sph1{BesselFamily::Spherical, 1};
const OscillatorKind cyl1{BesselFamily::Cylindrical, 1};

template <class F>
Eigen::VectorXd sample(const SubintervalSystem& sys, F f) {
    Eigen::VectorXd v(sys.grid().n());
    for (int j = 0; j < sys.grid().n(); ++j) {
        v(j) = f(sys.grid().nodes()[static_cast<std::size_t>(j)]);
    }
    return v;
}

template <class F>
double levin_interval(const OscillatorKind& kind, const OscillatorParams& p, double lo, double hi, int n, F f) {
    const SubintervalSystem sys = assemble(kind, p, lo, hi, n);
    return interval_integral(sys, solve_rhs(sys, sample(sys, f)));
}

double tight_gk(const std::function<double(double)>& g, double a, double b) {
    OracleSettings s;
    s.abs_tol = 1e-16;
    s.rel_tol = 1e-14;
    return gauss_kronrod(g, a, b, s).value;
}

}  // namespace

TEST_CASE("Chebyshev basis") {
    const ChebyshevBasis at1 = chebyshev_basis(4, 1.0);
    CHECK(at1.values == std::vector<double>{1, 1, 1, 1});
    const ChebyshevBasis at0 = chebyshev_basis(4, 0.0);
    CHECK(at0.values == std::vector<double>{1, 0, -1, 0});
    CHECK(at0.derivs == std::vector<double>{0, 1, 0, -3});
    CHECK_THROWS_AS(chebyshev_basis(4, 1.5), std::domain_error);
    const ChebyshevBasis b = chebyshev_basis(12, 0.3);
    for (int m = 0; m < 12; ++m) {
        CHECK(b.values[static_cast<std::size_t>(m)] == doctest::Approx(std::cos(m * std::acos(0.3))).epsilon(1e-14));
    }
}

TEST_CASE("Gauss-Lobatto grid") {
    const CollocationGrid g(1.0, 3.0, 6);
    CHECK(g.nodes().front() == 3.0);
    CHECK(g.nodes().back() == 1.0);
    for (int j = 0; j < 6; ++j) {
        const double t = std::cos(std::numbers::pi * j / 5.0);
        CHECK(g.reference_nodes()[static_cast<std::size_t>(j)] == doctest::Approx(t).epsilon(1e-15));
        CHECK(g.nodes()[static_cast<std::size_t>(j)] == doctest::Approx(2.0 + t).epsilon(1e-15));
    }
    CHECK_THROWS_AS(CollocationGrid(2.0, 1.0, 6), std::domain_error);
    CHECK_THROWS_AS(CollocationGrid(1.0, 2.0, 5), std::invalid_argument);
}

TEST_CASE("assembly shape, factorization and determinism") {
    const OscillatorParams p{{3, 1}, {4.0, 2.5}};
    const OscillatorKind kind{BesselFamily::Spherical, 2};
    const SubintervalSystem a = assemble(kind, p, 1.0, 2.0, 10);
    CHECK(a.size() == 40);
    CHECK(a.matrix().rows() == 40);
    const auto& lu = a.factorization();
    const Eigen::MatrixXd l = lu.matrixLU().triangularView<Eigen::UnitLower>();
    const Eigen::MatrixXd u = lu.matrixLU().triangularView<Eigen::Upper>();
    const Eigen::MatrixXd rebuilt = lu.permutationP().transpose() * (l * u);
    CHECK((rebuilt - a.matrix()).norm() / a.matrix().norm() < 1e-12);

    const SubintervalSystem b = assemble(kind, p, 1.0, 2.0, 10);
    CHECK(std::memcmp(a.matrix().data(), b.matrix().data(), sizeof(double) * 1600) == 0);

    CHECK_THROWS_AS(assemble(sph1, {{0}, {1.0}}, 0.0, 1.0, 8), std::domain_error);
    CHECK_THROWS_AS(assemble(sph1, {{0}, {1.0}}, 2.0, 1.0, 8), std::domain_error);
    CHECK_THROWS_AS(assemble(sph1, {{0}, {1.0}}, 1.0, 2.0, 7), std::invalid_argument);
}

TEST_CASE("block entries use the transposed matrix") {
    const OscillatorParams p{{2}, {3.0}};
    const SubintervalSystem s = assemble(sph1, p, 1.0, 2.0, 4);
    const auto& grid = s.grid();
    const int j = 1;
    const int m = 2;
    const double x = grid.nodes()[j];
    const ChebyshevBasis basis = chebyshev_basis(4, grid.reference_nodes()[j]);
    const Eigen::Matrix2d a = a_matrix(sph1, p, x);
    const Eigen::Matrix2d want =
        a.transpose() * basis.values[m] + Eigen::Matrix2d::Identity() * basis.derivs[m] * grid.jacobian();
    CHECK((s.matrix().block<2, 2>(2 * j, 2 * m) - want).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sin(x)/x on [1, 2] with eight points") {
    const double levin = levin_interval(sph1, {{0}, {1.0}}, 1.0, 2.0, 8, [](double) { return 1.0; });
    const double want = tight_gk([](double x) { return std::sin(x) / x; }, 1.0, 2.0);
    CHECK(std::abs(levin / want - 1.0) < 1e-8);
}

TEST_CASE("Si(pi) - Si(1e-3) on one interval") {
    const double levin = levin_interval(sph1, {{0}, {1.0}}, 1e-3, std::numbers::pi, 16, [](double) { return 1.0; });
    const double want = reference::sine_integral(std::numbers::pi) - reference::sine_integral(1e-3);
    CHECK(want == doctest::Approx(1.8509).epsilon(1e-4));
    CHECK(std::abs(levin / want - 1.0) < 1e-6);
}

TEST_CASE("Hankel pairing at k = 1") {
    double levin = 0.0;
    const auto f = [](double r) { return std::pow(r, 5) * std::exp(-0.5 * r * r); };
    // split at the Gaussian scale so each piece is polynomial-like
    const double edges[] = {1e-5, 4.0, 8.0, 12.0, 30.0};
    for (int i = 0; i < 4; ++i) {
        levin += levin_interval(cyl1, {{4}, {1.0}}, edges[i], edges[i + 1], 32, f);
    }
    CHECK(levin == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));
}

TEST_CASE("solve_rhs linearity and columnwise independence") {
    const SubintervalSystem s = assemble({BesselFamily::Cylindrical, 2}, {{1, 4}, {2.0, 5.0}}, 0.5, 1.5, 10);
    const Eigen::VectorXd zero = solve_rhs(s, Eigen::VectorXd(Eigen::VectorXd::Zero(10)));
    CHECK((zero.array() == 0.0).all());
    CHECK(interval_integral(s, zero) == 0.0);

    const Eigen::VectorXd f = sample(s, [](double x) { return 1.0 + x * x; });
    const Eigen::VectorXd c = solve_rhs(s, f);
    const Eigen::VectorXd c4 = solve_rhs(s, Eigen::VectorXd(4.0 * f));
    CHECK(std::memcmp(c4.data(), Eigen::VectorXd(4.0 * c).data(), sizeof(double) * 40) == 0);
    const Eigen::VectorXd c3 = solve_rhs(s, Eigen::VectorXd(3.0 * f));
    CHECK((c3 - 3.0 * c).norm() <= 1e-12 * c3.norm());

    Eigen::MatrixXd both(10, 2);
    both.col(0) = f;
    both.col(1) = sample(s, [](double x) { return std::exp(-x); });
    const Eigen::MatrixXd joint = solve_rhs(s, both);
    const Eigen::VectorXd second = solve_rhs(s, Eigen::VectorXd(both.col(1)));
    CHECK(std::memcmp(Eigen::VectorXd(joint.col(0)).data(), c.data(), sizeof(double) * 40) == 0);
    CHECK(std::memcmp(Eigen::VectorXd(joint.col(1)).data(), second.data(), sizeof(double) * 40) == 0);
    CHECK_THROWS_AS(solve_rhs(s, Eigen::VectorXd(Eigen::VectorXd::Zero(9))), std::invalid_argument);
}

TEST_CASE("node weights reproduce the solve") {
    const SubintervalSystem s = assemble({BesselFamily::Spherical, 3}, {{2, 5, 1}, {3.0, 1.0, 2.0}}, 1.0, 3.0, 12);
    const Eigen::VectorXd f = sample(s, [](double x) { return x * x * x + 2.0; });
    const double direct = interval_integral(s, solve_rhs(s, f));
    const double weighted = node_weights(s).dot(f);
    CHECK(weighted == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("collocation residual") { CHECK(selftest::collocation_residual().passed); }

TEST_CASE("non-oscillatory limit matches direct quadrature") {
    const OscillatorParams p{{1}, {0.2}};
    const auto f = [](double x) { return std::log(1.0 + x); };
    const double levin = levin_interval(sph1, p, 1.0, 2.0, 10, f);
    const double want = tight_gk([&](double x) { return f(x) * sph_bessel(1, 0.2 * x); }, 1.0, 2.0);
    CHECK(std::abs(levin / want - 1.0) < 1e-8);
}

TEST_CASE("n-refinement differences decay") {
    const OscillatorParams p{{2}, {10.0}};
    const auto f = [](double x) { return x * x + 1.0; };
    std::vector<double> values;
    for (int n : {4, 8, 16, 32, 64}) {
        values.push_back(levin_interval(sph1, p, 1.0, 3.0, n, f));
    }
    const double scale = std::abs(values.back());
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double diff = std::abs(values[i] - values[i + 1]);
        if (diff < 1e-13 * scale) {
            break;
        }
        CHECK(diff < previous);
        previous = diff;
    }
}

TEST_CASE("affine change of variable") {
    // int_1^2 f(x) j_3(k x) dx = int_{1/2}^1 2 f(2y) j_3(2k y) dy
    const auto f = [](double x) { return 1.0 + x; };
    const double direct = levin_interval(sph1, {{3}, {6.0}}, 1.0, 2.0, 16, f);
    const double mapped = levin_interval(sph1, {{3}, {12.0}}, 0.5, 1.0, 16, [&](double y) { return 2.0 * f(2.0 * y); });
    CHECK(std::abs(direct - mapped) <= 1e-12 * std::abs(direct));
}

TEST_CASE("singular systems") {
    // Equal frequencies make the two-factor system rank deficient.
    const OscillatorKind kind{BesselFamily::Spherical, 2};
    const OscillatorParams p{{0, 0}, {1.0, 1.0}};
    bool singular = false;
    try {
        assemble(kind, p, 1.0, 2.0, 10);
    } catch (const DegenerateSystemError& e) {
        singular = true;
        CHECK(e.lo() == 1.0);
        CHECK(e.hi() == 2.0);
    }
    if (singular) {
        const SubintervalSystem s = assemble(kind, p, 1.0, 2.0, 10, SingularPolicy::PseudoInverse);
        CHECK(s.pseudo_inverse());
        const double levin = interval_integral(s, solve_rhs(s, sample(s, [](double) { return 1.0; })));
        const double want = tight_gk([](double x) { return std::pow(std::sin(x) / x, 2); }, 1.0, 2.0);
        CHECK(std::abs(levin / want - 1.0) < 1e-6);
    }
}

TEST_CASE("factorization counter") {
    const std::uint64_t before = factorization_count();
    assemble(sph1, {{0}, {1.0}}, 1.0, 2.0, 8);
    CHECK(factorization_count() == before + 1);
}
