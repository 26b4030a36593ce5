#pragma once

namespace levin::reference {

/// Ascending power series of j_ell(x) in long double, `terms` terms.
long double sph_bessel_series(int ell, long double x, int terms = 60);

/// Ascending power series of J_nu(x) in long double, `terms` terms.
long double cyl_bessel_series(int nu, long double x, int terms = 60);

/// Sine integral Si(x) from its power series; accurate for |x| <= 10.
double sine_integral(double x);

/// The Hankel pair int_0^inf r^5 exp(-r^2/2) J_4(k r) dr = k^4 exp(-k^2/2).
double gaussian_hankel_pair(double k);

}  // namespace levin::reference
