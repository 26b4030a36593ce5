#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace levin {

enum class BesselFamily { Spherical, Cylindrical };

/// Which oscillator multiplies the integrand: a product of `count` Bessel
/// functions of one family. The oscillatory vector has dimension 2^count.
struct OscillatorKind {
    BesselFamily family = BesselFamily::Spherical;
    int count = 1;

    [[nodiscard]] int dim() const { return 1 << count; }
    friend bool operator==(const OscillatorKind&, const OscillatorKind&) = default;
};

/// Orders and frequencies of each Bessel factor; both lists have `count` entries.
struct OscillatorParams {
    std::vector<int> orders;
    std::vector<double> freqs;

    friend bool operator==(const OscillatorParams&, const OscillatorParams&) = default;
};

/// Throws std::invalid_argument if the pair is inconsistent (wrong sizes,
/// negative orders, negative or non-finite frequencies).
void validate(const OscillatorKind& kind, const OscillatorParams& params);

/// Spherical Bessel function of the first kind j_ell(x), integer ell >= 0, x >= 0.
double sph_bessel(int ell, double x);

/// Cylindrical Bessel function of the first kind J_nu(x), integer nu >= 0, x >= 0.
double cyl_bessel(int nu, double x);

/// Dispatches on the family.
double bessel(BesselFamily family, int order, double x);

/// Order offsets (0 or 1 per factor) of each component of w, in the
/// component ordering used throughout the library. For count = 2 the
/// ordering is (0,0), (1,0), (0,1), (1,1); for count = 3 it is
/// (0,0,0), (1,0,0), (0,1,0), (0,0,1), (1,1,0), (0,1,1), (1,0,1), (1,1,1).
std::span<const std::array<int, 3>> component_offsets(int count);

/// The oscillatory vector w(x): component c is the product over factors i of
/// B_{orders[i] + offset_i(c)}(freqs[i] * x).
Eigen::VectorXd w_vector(const OscillatorKind& kind, const OscillatorParams& params, double x);

/// First component of w, i.e. the oscillatory factor of the integrand itself.
double w_leading(const OscillatorKind& kind, const OscillatorParams& params, double x);

/// The 2x2 matrix of a single Bessel factor with dw/dx = A w.
Eigen::Matrix2d single_factor_matrix(BesselFamily family, int order, double freq, double x);

/// The matrix A(x) with dw/dx = A(x) w(x), built as the Kronecker sum of the
/// single-factor matrices in the component ordering of `component_offsets`.
Eigen::MatrixXd a_matrix(const OscillatorKind& kind, const OscillatorParams& params, double x);

namespace detail {

// Individual evaluation regimes, exposed for cross-regime tests.
double sph_bessel_series(int ell, double x);
double sph_bessel_miller(int ell, double x);
double sph_bessel_trig(int ell, double x);
double cyl_bessel_series(int nu, double x);
double cyl_bessel_miller(int nu, double x);
double cyl_bessel_hankel(int nu, double x);

// Regime boundaries: series below the first, asymptotic at or above the second.
double sph_series_limit(int ell);
double sph_trig_limit(int ell);
double cyl_series_limit(int nu);
double cyl_hankel_limit(int nu);

}  // namespace detail

namespace testing {

/// Mutation hook: while alive, a_matrix flips the sign of its off-diagonal
/// frequency terms. Used to check that the self-validation suite notices.
class ScopedAMatrixFault {
public:
    ScopedAMatrixFault();
    ~ScopedAMatrixFault();
    ScopedAMatrixFault(const ScopedAMatrixFault&) = delete;
    ScopedAMatrixFault& operator=(const ScopedAMatrixFault&) = delete;
};

}  // namespace testing

}  // namespace levin
