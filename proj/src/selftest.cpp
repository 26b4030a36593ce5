#include "levin/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "levin/adaptive.hpp"
#include "levin/bessel.hpp"
#include "levin/collocation.hpp"
#include "levin/integrand.hpp"
#include "levin/oracle.hpp"
#include "levin/problems.hpp"
#include "levin/reference.hpp"
#include "levin/session.hpp"

namespace levin::selftest {

namespace {

std::string fmt(const char* format, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

Check timed(const std::string& name, const std::function<void(Check&)>& body) {
    Check c;
    c.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.passed = false;
        c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return c;
}

double rel_diff(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

bool bitwise_equal(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) {
        return false;
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (std::memcmp(x.data() + i, y.data() + i, sizeof(double)) != 0) {
            return false;
        }
    }
    return true;
}

// Two smooth positive integrands on [1e-5, 100] for the batch invariants.
IntegrandTable batch_table(bool log_y) {
    return tabulate({poly_eq7, [](double x) { return std::pow(x, 2.5) + std::pow(x, 1.5) + x; }}, 1e-5, 100.0, 400,
                    true, log_y);
}

BatchRequest eq7_request(const std::vector<double>& ks) {
    BatchRequest req;
    req.a.assign(ks.size(), 1e-5);
    req.b.assign(ks.size(), 100.0);
    req.k = {ks, ks};
    req.ell = {std::vector<int>(ks.size(), 10), std::vector<int>(ks.size(), 5)};
    return req;
}

}  // namespace

Check bessel_closed_forms() {
    return timed("bessel closed forms", [](Check& c) {
        double worst = 0.0;
        for (double x : {0.3, 1.0, 2.5, 7.0, 15.0, 40.0, 123.4}) {
            const double s = std::sin(x);
            const double co = std::cos(x);
            worst = std::max(worst, rel_diff(sph_bessel(0, x), s / x));
            worst = std::max(worst, rel_diff(sph_bessel(1, x), s / (x * x) - co / x));
            worst = std::max(worst, rel_diff(sph_bessel(2, x), (3.0 / (x * x) - 1.0) * s / x - 3.0 * co / (x * x)));
            worst = std::max(worst, rel_diff(cyl_bessel(0, x), std::cyl_bessel_j(0.0, x)));
            worst = std::max(worst, rel_diff(cyl_bessel(1, x), std::cyl_bessel_j(1.0, x)));
        }
        const bool zeros = sph_bessel(0, 0.0) == 1.0 && sph_bessel(3, 0.0) == 0.0 && cyl_bessel(0, 0.0) == 1.0 &&
                           cyl_bessel(2, 0.0) == 0.0;
        c.passed = worst < 1e-10 && zeros;
        c.detail = fmt("max rel err %.2e", worst);
    });
}

Check bessel_series_oracle() {
    return timed("bessel series oracle", [](Check& c) {
        double worst = 0.0;
        const std::pair<int, double> cases[] = {{5, 10.0}, {0, 3.0}, {10, 4.0}, {15, 8.0}, {2, 0.01}};
        for (const auto& [ell, x] : cases) {
            worst = std::max(worst, rel_diff(sph_bessel(ell, x),
                                             static_cast<double>(reference::sph_bessel_series(ell, x))));
            worst = std::max(worst, rel_diff(cyl_bessel(ell, x),
                                             static_cast<double>(reference::cyl_bessel_series(ell, x))));
        }
        worst = std::max(worst, rel_diff(cyl_bessel(4, 7.5), static_cast<double>(reference::cyl_bessel_series(4, 7.5))));
        c.passed = worst < 1e-12;
        c.detail = fmt("max rel err %.2e (j_5(10), J_4(7.5), ...)", worst);
    });
}

Check bessel_recurrence(bool quick) {
    return timed("bessel recurrence", [quick](Check& c) {
        // j_{l-1} + j_{l+1} = (2l+1)/x j_l and J_{n-1} + J_{n+1} = 2n/x J_n.
        double worst = 0.0;
        const int max_order = quick ? 20 : 40;
        for (double x : log_space(0.05, 500.0, quick ? 20 : 80)) {
            for (int l = 1; l < max_order; ++l) {
                const double js = sph_bessel(l, x);
                const double lhs_s = sph_bessel(l - 1, x) + sph_bessel(l + 1, x);
                const double scale_s = std::abs(sph_bessel(l - 1, x)) + std::abs(sph_bessel(l + 1, x)) + 1e-300;
                worst = std::max(worst, std::abs(lhs_s - (2.0 * l + 1.0) / x * js) / scale_s);
                const double jc = cyl_bessel(l, x);
                const double lhs_c = cyl_bessel(l - 1, x) + cyl_bessel(l + 1, x);
                const double scale_c = std::abs(cyl_bessel(l - 1, x)) + std::abs(cyl_bessel(l + 1, x)) + 1e-300;
                worst = std::max(worst, std::abs(lhs_c - 2.0 * l / x * jc) / scale_c);
            }
        }
        c.passed = worst < 1e-10;
        c.detail = fmt("max scaled residual %.2e", worst);
    });
}

Check derivative_identity(int samples_per_kind, std::uint64_t seed) {
    return timed("derivative identity", [samples_per_kind, seed](Check& c) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> order(0, 20);
        std::uniform_real_distribution<double> log_freq(std::log(0.1), std::log(100.0));
        std::uniform_real_distribution<double> log_x(std::log(0.1), std::log(10.0));
        int failures = 0;
        int cases = 0;
        double worst = 0.0;
        for (int count = 1; count <= 3; ++count) {
            for (BesselFamily family : {BesselFamily::Spherical, BesselFamily::Cylindrical}) {
                const OscillatorKind kind{family, count};
                for (int s = 0; s < samples_per_kind; ++s) {
                    OscillatorParams p;
                    for (int i = 0; i < count; ++i) {
                        p.orders.push_back(order(rng));
                        p.freqs.push_back(std::exp(log_freq(rng)));
                    }
                    const double x = std::exp(log_x(rng));
                    const double h = 1e-5 * x;
                    const Eigen::VectorXd fd = (-w_vector(kind, p, x + 2 * h) + 8.0 * w_vector(kind, p, x + h) -
                                                8.0 * w_vector(kind, p, x - h) + w_vector(kind, p, x - 2 * h)) /
                                               (12.0 * h);
                    const Eigen::VectorXd aw = a_matrix(kind, p, x) * w_vector(kind, p, x);
                    const double ratio = (fd - aw).norm() / (aw.norm() + 1e-14);
                    worst = std::max(worst, ratio);
                    failures += ratio <= 1e-6 ? 0 : 1;
                    ++cases;
                }
            }
        }
        c.passed = failures == 0;
        c.detail = fmt("%d/%d cases within 1e-6, worst %.2e", cases - failures, cases, worst);
    });
}

Check kronecker_sum(int samples, std::uint64_t seed) {
    return timed("kronecker sum", [samples, seed](Check& c) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> order(0, 20);
        std::uniform_real_distribution<double> freq(0.1, 100.0);
        std::uniform_real_distribution<double> abscissa(0.01, 50.0);
        int mismatches = 0;
        int cases = 0;
        for (int count = 2; count <= 3; ++count) {
            for (BesselFamily family : {BesselFamily::Spherical, BesselFamily::Cylindrical}) {
                const OscillatorKind kind{family, count};
                const auto offsets = component_offsets(count);
                for (int s = 0; s < samples; ++s) {
                    OscillatorParams p;
                    for (int i = 0; i < count; ++i) {
                        p.orders.push_back(order(rng));
                        p.freqs.push_back(freq(rng));
                    }
                    const double x = abscissa(rng);
                    // Binary layout: factor 0 is the most significant bit.
                    const int d = kind.dim();
                    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
                    for (int i = 0; i < count; ++i) {
                        const Eigen::Matrix2d f = single_factor_matrix(family, p.orders[i], p.freqs[i], x);
                        const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(1 << i, 1 << i);
                        const Eigen::MatrixXd right = Eigen::MatrixXd::Identity(1 << (count - 1 - i), 1 << (count - 1 - i));
                        const Eigen::MatrixXd term = Eigen::kroneckerProduct(Eigen::kroneckerProduct(left, f).eval(), right);
                        sum = sum + term;
                    }
                    auto binary = [&](int comp) {
                        int idx = 0;
                        for (int i = 0; i < count; ++i) {
                            idx = 2 * idx + offsets[comp][i];
                        }
                        return idx;
                    };
                    const Eigen::MatrixXd a = a_matrix(kind, p, x);
                    bool same = true;
                    for (int r = 0; r < d; ++r) {
                        for (int q = 0; q < d; ++q) {
                            same = same && a(r, q) == sum(binary(r), binary(q));
                        }
                    }
                    mismatches += same ? 0 : 1;
                    ++cases;
                }
            }
        }
        c.passed = mismatches == 0;
        c.detail = fmt("%d/%d matrices identical", cases - mismatches, cases);
    });
}

Check spline_reproduction() {
    return timed("spline reproduction", [](Check& c) {
        const IntegrandTable cubic = tabulate({[](double x) { return x * x * x; }, poly_eq7}, 1e-5, 100.0, 100, true, true);
        const Interpolant s(cubic);
        double node_err = 0.0;
        for (std::size_t i = 0; i < cubic.size(); ++i) {
            for (std::size_t col = 0; col < 2; ++col) {
                const double want = cubic.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col));
                node_err = std::max(node_err, rel_diff(s(cubic.x()[i], col), want));
            }
        }
        double power_err = 0.0;
        double poly_err = 0.0;
        for (double x : log_space(1e-5, 100.0, 10000)) {
            power_err = std::max(power_err, rel_diff(s(x, 0), x * x * x));
            poly_err = std::max(poly_err, rel_diff(s(x, 1), poly_eq7(x)));
        }
        const IntegrandTable dense = tabulate({poly_eq7}, 1e-5, 100.0, 2000, true, true);
        const Interpolant sd(dense);
        double dense_err = 0.0;
        for (double x : log_space(1e-5, 100.0, 10000)) {
            dense_err = std::max(dense_err, rel_diff(sd(x, 0), poly_eq7(x)));
        }
        c.passed = node_err == 0.0 && power_err < 1e-12 && dense_err < 1e-6 && poly_err < 1e-4;
        c.detail = fmt("nodes %.1e, x^3 %.1e, cubic poly %.1e (100 pts) %.1e (2000 pts)", node_err, power_err,
                       poly_err, dense_err);
    });
}

Check collocation_residual() {
    return timed("collocation residual", [](Check& c) {
        double worst_residual = 0.0;
        struct Case {
            OscillatorKind kind;
            OscillatorParams params;
            double lo;
            double hi;
            int n;
        };
        const Case cases[] = {
            {{BesselFamily::Spherical, 1}, {{3}, {20.0}}, 1.0, 2.0, 16},
            {{BesselFamily::Cylindrical, 1}, {{0}, {5.0}}, 0.5, 3.0, 12},
            {{BesselFamily::Spherical, 2}, {{10, 5}, {2.0, 3.0}}, 1.0, 4.0, 12},
            {{BesselFamily::Cylindrical, 3}, {{1, 2, 3}, {1.0, 2.0, 3.0}}, 1.0, 2.0, 10},
        };
        for (const Case& cs : cases) {
            const SubintervalSystem sys = assemble(cs.kind, cs.params, cs.lo, cs.hi, cs.n);
            Eigen::VectorXd f(cs.n);
            for (int j = 0; j < cs.n; ++j) {
                const double x = sys.grid().nodes()[static_cast<std::size_t>(j)];
                f(j) = x * x + 1.0;
            }
            const Eigen::VectorXd coeff = solve_rhs(sys, f);
            for (int j = 0; j < cs.n; ++j) {
                const double x = sys.grid().nodes()[static_cast<std::size_t>(j)];
                const PolynomialState p = evaluate_p(sys, coeff, x);
                Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.dim());
                rhs(0) = f(j);
                const Eigen::VectorXd r =
                    p.derivative + a_matrix(cs.kind, cs.params, x).transpose() * p.value - rhs;
                worst_residual = std::max(worst_residual, r.norm() / (1.0 + rhs.norm()));
            }
        }
        // int_1^2 sin(x)/x dx on one interval with n = 8.
        const SubintervalSystem sys = assemble({BesselFamily::Spherical, 1}, {{0}, {1.0}}, 1.0, 2.0, 8);
        const double levin = interval_integral(sys, solve_rhs(sys, Eigen::VectorXd(Eigen::VectorXd::Ones(8))));
        OracleSettings tight;
        tight.abs_tol = 1e-15;
        tight.rel_tol = 1e-14;
        const double want = gauss_kronrod([](double x) { return std::sin(x) / x; }, 1.0, 2.0, tight).value;
        const double err = rel_diff(levin, want);
        c.passed = worst_residual <= 1e-10 && err < 1e-8;
        c.detail = fmt("max residual %.2e, sin(x)/x over [1,2] rel err %.2e", worst_residual, err);
    });
}

Check si_single_bessel() {
    return timed("Si(pi) single Bessel", [](Check& c) {
        const IntegrandTable one = tabulate({[](double) { return 1.0; }}, 1e-3, std::numbers::pi, 16, true, true);
        Session session(IntegralType::SingleSpherical, one);
        BatchRequest req;
        req.a = {1e-3};
        req.b = {std::numbers::pi};
        req.k = {{1.0}};
        req.ell = {{0}};
        const BatchResult r = session.integrate_batch(req);
        const double want = reference::sine_integral(std::numbers::pi) - reference::sine_integral(1e-3);
        const double err = rel_diff(r.values(0, 0), want);
        const double si_pi_err = std::abs(reference::sine_integral(std::numbers::pi) - 1.8519370);
        c.passed = err < 1e-6 && r.all_converged() && si_pi_err < 1e-7;
        c.detail = fmt("%.10f vs %.10f, rel err %.2e", r.values(0, 0), want, err);
    });
}

Check hankel_pair(bool quick) {
    return timed("Hankel pair r^5 exp(-r^2/2) J_4", [quick](Check& c) {
        const Problem p = make_problem("eq6", quick ? 16 : 64);
        Session session(p.type, p.table, p.settings);
        const BatchResult r = session.integrate_batch(p.request());
        double worst = 0.0;
        int used = 0;
        for (std::size_t i = 0; i < p.k.size(); ++i) {
            const double want = p.closed_form(p.k[i]);
            if (want > 1e-12) {
                worst = std::max(worst, rel_diff(r.values(static_cast<Eigen::Index>(i), 0), want));
                ++used;
            }
        }
        c.passed = worst < 1e-3 && used > 0;
        c.detail = fmt("%d k values with true value > 1e-12, max rel err %.2e", used, worst);
    });
}

Check double_bessel_oracle(bool quick) {
    return timed("double Bessel vs oracle", [quick](Check& c) {
        const Problem p = make_problem("eq7");
        const std::vector<double> ks = quick ? std::vector<double>{0.1, 1.0} : log_space(1e-2, 10.0, 6);
        Session session(p.type, p.table, p.settings);
        const BatchResult r = session.integrate_batch(p.request(ks));
        const Interpolant& interp = session.interpolant();
        double worst = 0.0;
        int compared = 0;
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const OracleResult o = quad_reference(p.spec(ks[i]), interp, 0);
            if (o.converged) {
                worst = std::max(worst, rel_diff(r.values(static_cast<Eigen::Index>(i), 0), o.value));
                ++compared;
            }
        }
        c.passed = compared == static_cast<int>(ks.size()) && worst < 1e-3 && r.all_converged();
        c.detail = fmt("%d k values, max rel diff %.2e", compared, worst);
    });
}

Check frozen_tree_linearity() {
    return timed("frozen-tree linearity", [](Check& c) {
        const IntegrandTable base = batch_table(false);
        Session session(IntegralType::DoubleSpherical, base);
        const BatchRequest req = eq7_request({0.3, 2.0, 7.0});
        session.integrate_batch(req);
        const Eigen::MatrixXd f = base.values();
        Eigen::MatrixXd g(f.rows(), f.cols());
        for (Eigen::Index i = 0; i < f.rows(); ++i) {
            const double x = base.x()[static_cast<std::size_t>(i)];
            g(i, 0) = std::sqrt(x) + 2.0 * x;
            g(i, 1) = 1.0 + x * x;
        }
        const double alpha = 0.75;
        const double beta = -1.25;
        session.update_integrand(f);
        const Eigen::MatrixXd rf = session.integrate_batch(req).values;
        session.update_integrand(g);
        const Eigen::MatrixXd rg = session.integrate_batch(req).values;
        session.update_integrand(Eigen::MatrixXd(alpha * f + beta * g));
        const Eigen::MatrixXd rh = session.integrate_batch(req).values;
        const std::uint64_t factorizations = session.last_stats().factorizations;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < rh.size(); ++i) {
            const double scale = std::abs(alpha * rf(i)) + std::abs(beta * rg(i));
            worst = std::max(worst, std::abs(rh(i) - (alpha * rf(i) + beta * rg(i))) / scale);
        }
        c.passed = worst <= 1e-13 && factorizations == 0;
        c.detail = fmt("max rel deviation %.2e", worst);
    });
}

Check diagonal_consistency() {
    return timed("diagonal consistency", [](Check& c) {
        const IntegrandTable table = batch_table(true);
        BatchRequest req = eq7_request({0.5, 4.0});
        Session full_session(IntegralType::DoubleSpherical, table);
        const BatchResult full = full_session.integrate_batch(req);
        req.diagonal = true;
        Session diag_session(IntegralType::DoubleSpherical, table);
        const BatchResult fresh = diag_session.integrate_batch(req);
        const BatchResult reused = full_session.integrate_batch(req);
        const Eigen::MatrixXd want = full.values.diagonal();
        c.passed = bitwise_equal(fresh.values, want) && bitwise_equal(reused.values, want);
        c.detail = fmt("diagonal %.17g, %.17g", want(0), want(1));
    });
}

Check batch_loop_equivalence() {
    return timed("batch/loop equivalence", [](Check& c) {
        const IntegrandTable table = batch_table(true);
        const std::vector<double> ks{0.05, 0.8, 3.0, 3.0, 12.0};
        Session batch_session(IntegralType::DoubleSpherical, table);
        const Eigen::MatrixXd batch = batch_session.integrate_batch(eq7_request(ks)).values;
        Eigen::MatrixXd loop(batch.rows(), batch.cols());
        for (std::size_t i = 0; i < ks.size(); ++i) {
            Session single(IntegralType::DoubleSpherical, table);
            loop.row(static_cast<Eigen::Index>(i)) = single.integrate_batch(eq7_request({ks[i]})).values.row(0);
        }
        c.passed = bitwise_equal(batch, loop);
        c.detail = fmt("%zu tuples x %td integrands", ks.size(), batch.cols());
    });
}

Check worker_independence() {
    return timed("worker-count independence", [](Check& c) {
        const IntegrandTable table = batch_table(true);
        const BatchRequest req = eq7_request(log_space(0.05, 50.0, 16));
        Session one(IntegralType::DoubleSpherical, table);
        const Eigen::MatrixXd r1 = one.integrate_batch(req).values;
        Session many(IntegralType::DoubleSpherical, table);
        many.set_threads(4);
        const Eigen::MatrixXd r4 = many.integrate_batch(req).values;
        c.passed = bitwise_equal(r1, r4);
        c.detail = "1 vs 4 workers";
    });
}

Check warm_path_reuse() {
    return timed("warm path reuse", [](Check& c) {
        const IntegrandTable table = batch_table(false);
        Session session(IntegralType::DoubleSpherical, table);
        const BatchRequest req = eq7_request(log_space(0.1, 30.0, 8));
        const Eigen::MatrixXd cold = session.integrate_batch(req).values;
        const std::uint64_t cold_factorizations = session.last_stats().factorizations;
        session.update_integrand(Eigen::MatrixXd(2.0 * table.values()));
        const std::uint64_t before = factorization_count();
        const Eigen::MatrixXd warm = session.integrate_batch(req).values;
        const std::uint64_t global = factorization_count() - before;
        session.update_integrand(table.values());
        const Eigen::MatrixXd again = session.integrate_batch(req).values;
        c.passed = session.last_stats().factorizations == 0 && global == 0 && cold_factorizations > 0 &&
                   bitwise_equal(warm, Eigen::MatrixXd(2.0 * cold)) && bitwise_equal(again, cold);
        c.detail = fmt("cold %llu factorizations, warm %llu", static_cast<unsigned long long>(cold_factorizations),
                       static_cast<unsigned long long>(global));
    });
}

std::vector<Check> run_all(const Options& options) {
    std::vector<Check> checks;
    checks.push_back(bessel_closed_forms());
    checks.push_back(bessel_series_oracle());
    checks.push_back(bessel_recurrence(options.quick));
    checks.push_back(derivative_identity(options.quick ? 12 : 34, options.seed));
    checks.push_back(kronecker_sum(options.quick ? 10 : 50, options.seed));
    checks.push_back(spline_reproduction());
    checks.push_back(collocation_residual());
    checks.push_back(si_single_bessel());
    checks.push_back(hankel_pair(options.quick));
    checks.push_back(double_bessel_oracle(options.quick));
    checks.push_back(frozen_tree_linearity());
    checks.push_back(diagonal_consistency());
    checks.push_back(batch_loop_equivalence());
    checks.push_back(worker_independence());
    checks.push_back(warm_path_reuse());
    return checks;
}

bool print_report(std::ostream& os, const std::vector<Check>& checks) {
    std::size_t width = 0;
    for (const Check& c : checks) {
        width = std::max(width, c.name.size());
    }
    int failed = 0;
    double total = 0.0;
    for (const Check& c : checks) {
        std::string name = c.name;
        name.resize(width, ' ');
        os << (c.passed ? "PASS  " : "FAIL  ") << name << "  " << fmt("%7.2fs", c.seconds) << "  " << c.detail
           << '\n';
        failed += c.passed ? 0 : 1;
        total += c.seconds;
    }
    os << (failed == 0 ? "all " : "") << checks.size() - static_cast<std::size_t>(failed) << "/" << checks.size()
       << " checks passed in " << fmt("%.2fs", total) << '\n';
    return failed == 0;
}

}  // namespace levin::selftest
