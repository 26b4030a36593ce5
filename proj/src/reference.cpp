#include "levin/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace levin::reference {

long double sph_bessel_series(int ell, long double x, int terms) {
    if (ell < 0 || x < 0.0L) {
        throw std::domain_error("sph_bessel_series: negative argument");
    }
    // x^ell / (2 ell + 1)!!
    long double lead = 1.0L;
    for (int i = 1; i <= ell; ++i) {
        lead *= x / (2.0L * i + 1.0L);
    }
    const long double q = -0.5L * x * x;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < terms; ++k) {
        term *= q / (k * (2.0L * ell + 2.0L * k + 1.0L));
        sum += term;
    }
    return lead * sum;
}

long double cyl_bessel_series(int nu, long double x, int terms) {
    if (nu < 0 || x < 0.0L) {
        throw std::domain_error("cyl_bessel_series: negative argument");
    }
    long double lead = 1.0L;
    for (int i = 1; i <= nu; ++i) {
        lead *= 0.5L * x / i;
    }
    const long double q = -0.25L * x * x;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < terms; ++k) {
        term *= q / (static_cast<long double>(k) * (k + nu));
        sum += term;
    }
    return lead * sum;
}

double sine_integral(double x) {
    if (std::abs(x) > 10.0) {
        throw std::domain_error("sine_integral: series used only for |x| <= 10");
    }
    const long double xl = x;
    long double power = xl;  // x^(2n+1) / (2n+1)!
    long double sum = 0.0L;
    for (int n = 0; n < 60; ++n) {
        sum += power / (2.0L * n + 1.0L);
        power *= -xl * xl / ((2.0L * n + 2.0L) * (2.0L * n + 3.0L));
    }
    return static_cast<double>(sum);
}

double gaussian_hankel_pair(double k) { return std::pow(k, 4) * std::exp(-0.5 * k * k); }

}  // namespace levin::reference
