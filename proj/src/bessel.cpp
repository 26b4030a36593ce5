#include "levin/bessel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace levin {

namespace {

constexpr double kRescaleAbove = 1e250;
constexpr double kRescaleBy = 1e-250;
constexpr double kSeriesTol = 1e-17;

std::atomic<bool> g_a_matrix_fault{false};

void check_arguments(const char* who, int order, double x) {
    if (order < 0) {
        throw std::domain_error(std::string(who) + ": negative order " + std::to_string(order));
    }
    if (!(x >= 0.0)) {
        throw std::domain_error(std::string(who) + ": argument must be >= 0, got " + std::to_string(x));
    }
}

// ln((2l+1)!!)
double log_double_factorial_odd(int ell) {
    return std::lgamma(2.0 * ell + 2.0) - ell * std::numbers::ln2 - std::lgamma(ell + 1.0);
}

// sin(x - m pi/2) and cos(x - m pi/2) without subtracting from x.
void shifted_sincos(double x, int m, double& s_out, double& c_out) {
    const double s = std::sin(x);
    const double c = std::cos(x);
    switch (m & 3) {
    case 0: s_out = s;  c_out = c;  break;
    case 1: s_out = -c; c_out = s;  break;
    case 2: s_out = -s; c_out = -c; break;
    default: s_out = c; c_out = -s; break;
    }
}

std::int64_t miller_start(int order, double x) {
    const double top = std::max(static_cast<double>(order), std::ceil(x));
    return static_cast<std::int64_t>(top) + 20 + static_cast<std::int64_t>(std::sqrt(40.0 * top));
}

}  // namespace

void validate(const OscillatorKind& kind, const OscillatorParams& params) {
    if (kind.count < 1 || kind.count > 3) {
        throw std::invalid_argument("oscillator count must be 1, 2 or 3, got " + std::to_string(kind.count));
    }
    const auto n = static_cast<std::size_t>(kind.count);
    if (params.orders.size() != n || params.freqs.size() != n) {
        throw std::invalid_argument("oscillator needs " + std::to_string(n) + " orders and frequencies");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (params.orders[i] < 0) {
            throw std::invalid_argument("order " + std::to_string(i + 1) + " is negative");
        }
        if (!std::isfinite(params.freqs[i]) || params.freqs[i] < 0.0) {
            throw std::invalid_argument("frequency " + std::to_string(i + 1) + " must be finite and >= 0");
        }
    }
}

namespace detail {

double sph_series_limit(int ell) { return std::sqrt(2.0 * ell + 3.0); }
double sph_trig_limit(int ell) { return std::max(static_cast<double>(ell) * ell, 8.0); }
double cyl_series_limit(int nu) { return std::sqrt(2.0 * (nu + 1.0)); }
double cyl_hankel_limit(int nu) { return std::max(static_cast<double>(nu) * nu, 30.0); }

double sph_bessel_series(int ell, double x) {
    if (x == 0.0) {
        return ell == 0 ? 1.0 : 0.0;
    }
    if (ell > 0 && ell * std::log(x) - log_double_factorial_odd(ell) < std::log(std::numeric_limits<double>::min())) {
        return 0.0;
    }
    double prefactor = 1.0;
    for (int i = 1; i <= ell; ++i) {
        prefactor *= x / (2.0 * i + 1.0);
    }
    const double q = -0.5 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m < 500; ++m) {
        term *= q / (m * (2.0 * ell + 2.0 * m + 1.0));
        sum += term;
        if (std::abs(term) < kSeriesTol * std::abs(sum)) {
            break;
        }
    }
    return prefactor * sum;
}

double sph_bessel_trig(int ell, double x) {
    // j_l(x) = [sin(x - l pi/2) P(x) + cos(x - l pi/2) Q(x)] / x, with P and Q
    // terminating sums in 1/x.
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;
    for (int k = 1; k <= ell; ++k) {
        term *= (static_cast<double>(ell + k) * (ell - k + 1)) / (2.0 * k * x);
        switch (k & 3) {
        case 0: p += term; break;
        case 1: q += term; break;
        case 2: p -= term; break;
        default: q -= term; break;
        }
    }
    double s = 0.0;
    double c = 0.0;
    shifted_sincos(x, ell, s, c);
    return (s * p + c * q) / x;
}

double sph_bessel_miller(int ell, double x) {
    const std::int64_t start = std::max<std::int64_t>(miller_start(ell, x), ell + 1);
    double f_next = 0.0;
    double f = 1e-30;
    double stored = 0.0;
    for (std::int64_t m = start; m >= 1; --m) {
        const double f_prev = (2.0 * static_cast<double>(m) + 1.0) / x * f - f_next;
        f_next = f;
        f = f_prev;
        if (m - 1 == ell) {
            stored = f;
        }
        if (std::abs(f) > kRescaleAbove) {
            f *= kRescaleBy;
            f_next *= kRescaleBy;
            stored *= kRescaleBy;
        }
    }
    // f and f_next are now the unnormalised j_0 and j_1; normalise against
    // whichever closed form is further from a zero.
    const double j0 = std::sin(x) / x;
    const double j1 = (j0 - std::cos(x)) / x;
    const double scale = std::abs(j0) >= std::abs(j1) ? j0 / f : j1 / f_next;
    return stored * scale;
}

double cyl_bessel_series(int nu, double x) {
    if (x == 0.0) {
        return nu == 0 ? 1.0 : 0.0;
    }
    const double half = 0.5 * x;
    if (nu > 0 && nu * std::log(half) - std::lgamma(nu + 1.0) < std::log(std::numeric_limits<double>::min())) {
        return 0.0;
    }
    double prefactor = 1.0;
    for (int i = 1; i <= nu; ++i) {
        prefactor *= half / i;
    }
    const double q = -half * half;
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m < 500; ++m) {
        term *= q / (static_cast<double>(m) * (nu + m));
        sum += term;
        if (std::abs(term) < kSeriesTol * std::abs(sum)) {
            break;
        }
    }
    return prefactor * sum;
}

double cyl_bessel_hankel(int nu, double x) {
    const double mu = 4.0 * static_cast<double>(nu) * nu;
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (8.0 * k * x);
        const double magnitude = std::abs(term);
        if (magnitude > last) {
            break;  // asymptotic series started to diverge
        }
        last = magnitude;
        // a_k / x^k enters with sign (-1)^{floor(k/2)}: even k into P, odd into Q
        switch (k & 3) {
        case 0: p += term; break;
        case 1: q += term; break;
        case 2: p -= term; break;
        default: q -= term; break;
        }
        if (magnitude < kSeriesTol * (std::abs(p) + std::abs(q))) {
            break;
        }
    }
    double s = 0.0;
    double c = 0.0;
    shifted_sincos(x, nu, s, c);
    return std::sqrt(1.0 / (std::numbers::pi * x)) * (p * (c + s) - q * (s - c));
}

double cyl_bessel_miller(int nu, double x) {
    std::int64_t start = std::max<std::int64_t>(miller_start(nu, x), nu + 1);
    start += start & 1;
    double f_next = 0.0;
    double f = 1e-30;
    double stored = start == nu ? f : 0.0;
    double norm = 2.0 * f;
    for (std::int64_t m = start; m >= 1; --m) {
        const double f_prev = 2.0 * static_cast<double>(m) / x * f - f_next;
        f_next = f;
        f = f_prev;
        const std::int64_t j = m - 1;
        if (j == nu) {
            stored = f;
        }
        if (j == 0) {
            norm += f;
        } else if ((j & 1) == 0) {
            norm += 2.0 * f;
        }
        if (std::abs(f) > kRescaleAbove) {
            f *= kRescaleBy;
            f_next *= kRescaleBy;
            stored *= kRescaleBy;
            norm *= kRescaleBy;
        }
    }
    return stored / norm;
}

}  // namespace detail

double sph_bessel(int ell, double x) {
    check_arguments("sph_bessel", ell, x);
    if (x == 0.0) {
        return ell == 0 ? 1.0 : 0.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    if (ell == 0) {
        return x < 1e-4 ? detail::sph_bessel_series(0, x) : std::sin(x) / x;
    }
    if (x < detail::sph_series_limit(ell)) {
        return detail::sph_bessel_series(ell, x);
    }
    if (x >= detail::sph_trig_limit(ell)) {
        return detail::sph_bessel_trig(ell, x);
    }
    return detail::sph_bessel_miller(ell, x);
}

double cyl_bessel(int nu, double x) {
    check_arguments("cyl_bessel", nu, x);
    if (x == 0.0) {
        return nu == 0 ? 1.0 : 0.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    if (x < detail::cyl_series_limit(nu)) {
        return detail::cyl_bessel_series(nu, x);
    }
    if (x >= detail::cyl_hankel_limit(nu)) {
        return detail::cyl_bessel_hankel(nu, x);
    }
    return detail::cyl_bessel_miller(nu, x);
}

double bessel(BesselFamily family, int order, double x) {
    return family == BesselFamily::Spherical ? sph_bessel(order, x) : cyl_bessel(order, x);
}

std::span<const std::array<int, 3>> component_offsets(int count) {
    static constexpr std::array<std::array<int, 3>, 2> one{{{0, 0, 0}, {1, 0, 0}}};
    static constexpr std::array<std::array<int, 3>, 4> two{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}};
    static constexpr std::array<std::array<int, 3>, 8> three{{
        {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
        {1, 1, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1},
    }};
    switch (count) {
    case 1: return one;
    case 2: return two;
    case 3: return three;
    default: throw std::invalid_argument("oscillator count must be 1, 2 or 3");
    }
}

Eigen::VectorXd w_vector(const OscillatorKind& kind, const OscillatorParams& params, double x) {
    if (!(x > 0.0)) {
        throw std::domain_error("w_vector: x must be > 0");
    }
    validate(kind, params);
    std::array<std::array<double, 2>, 3> factor{};
    for (int i = 0; i < kind.count; ++i) {
        const double arg = params.freqs[i] * x;
        factor[i][0] = bessel(kind.family, params.orders[i], arg);
        factor[i][1] = bessel(kind.family, params.orders[i] + 1, arg);
    }
    const auto offsets = component_offsets(kind.count);
    Eigen::VectorXd w(kind.dim());
    for (int c = 0; c < kind.dim(); ++c) {
        double value = factor[0][offsets[c][0]];
        for (int i = 1; i < kind.count; ++i) {
            value *= factor[i][offsets[c][i]];
        }
        w(c) = value;
    }
    return w;
}

double w_leading(const OscillatorKind& kind, const OscillatorParams& params, double x) {
    double value = bessel(kind.family, params.orders[0], params.freqs[0] * x);
    for (int i = 1; i < kind.count; ++i) {
        value *= bessel(kind.family, params.orders[i], params.freqs[i] * x);
    }
    return value;
}

Eigen::Matrix2d single_factor_matrix(BesselFamily family, int order, double freq, double x) {
    const double ell = order;
    const double k = g_a_matrix_fault.load(std::memory_order_relaxed) ? -freq : freq;
    Eigen::Matrix2d a;
    a(0, 0) = ell / x;
    a(0, 1) = -k;
    a(1, 0) = k;
    a(1, 1) = family == BesselFamily::Spherical ? -(ell + 2.0) / x : -(ell + 1.0) / x;
    return a;
}

Eigen::MatrixXd a_matrix(const OscillatorKind& kind, const OscillatorParams& params, double x) {
    if (!(x > 0.0)) {
        throw std::domain_error("a_matrix: x must be > 0");
    }
    validate(kind, params);
    const int d = kind.dim();
    const auto offsets = component_offsets(kind.count);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < kind.count; ++i) {
        const Eigen::Matrix2d factor = single_factor_matrix(kind.family, params.orders[i], params.freqs[i], x);
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) {
                bool others_match = true;
                for (int j = 0; j < kind.count; ++j) {
                    if (j != i && offsets[r][j] != offsets[c][j]) {
                        others_match = false;
                        break;
                    }
                }
                if (others_match) {
                    a(r, c) += factor(offsets[r][i], offsets[c][i]);
                }
            }
        }
    }
    return a;
}

namespace testing {

ScopedAMatrixFault::ScopedAMatrixFault() { g_a_matrix_fault.store(true); }
ScopedAMatrixFault::~ScopedAMatrixFault() { g_a_matrix_fault.store(false); }

}  // namespace testing

}  // namespace levin
