#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "levin/bessel.hpp"

namespace levin {

/// T_m(t) and dT_m/dt for m = 0..n-1 at |t| <= 1.
struct ChebyshevBasis {
    std::vector<double> values;
    std::vector<double> derivs;
};

ChebyshevBasis chebyshev_basis(int n, double t);

/// Chebyshev-Gauss-Lobatto points of [lo, hi]. Node j is the image of
/// t_j = cos(pi j / (n - 1)), so node 0 is hi and node n-1 is lo (both exact).
class CollocationGrid {
public:
    CollocationGrid(double lo, double hi, int n);

    [[nodiscard]] double lo() const { return lo_; }
    [[nodiscard]] double hi() const { return hi_; }
    [[nodiscard]] int n() const { return static_cast<int>(nodes_.size()); }
    [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<double>& reference_nodes() const { return t_; }

    /// Maps x in [lo, hi] to [-1, 1].
    [[nodiscard]] double to_reference(double x) const;
    /// d t / d x.
    [[nodiscard]] double jacobian() const { return 2.0 / (hi_ - lo_); }

private:
    double lo_;
    double hi_;
    std::vector<double> t_;
    std::vector<double> nodes_;
};

/// Raised when the collocation matrix is singular to working precision.
class DegenerateSystemError : public std::runtime_error {
public:
    DegenerateSystemError(double lo, double hi);
    [[nodiscard]] double lo() const { return lo_; }
    [[nodiscard]] double hi() const { return hi_; }

private:
    double lo_;
    double hi_;
};

/// How assemble treats a collocation matrix that is singular to working precision.
enum class SingularPolicy {
    Throw,          ///< raise DegenerateSystemError
    PseudoInverse,  ///< solve in the least-squares sense with a truncated SVD
};

/// The LU factors are rejected when a pivot vanishes or the reciprocal
/// condition estimate is at or below this value. Ill-conditioned but
/// invertible systems are kept: the near-null directions are homogeneous
/// solutions of the Levin equation and cancel in <p, w>(hi) - <p, w>(lo).
inline constexpr double kLuConditionLimit = 0.0;
/// Singular values below this fraction of the largest are dropped.
inline constexpr double kSvdTruncation = 1e-10;

/// The factorized Levin collocation system p' + A^T p = F on one interval,
/// with p expanded in Chebyshev polynomials. Independent of the integrand.
class SubintervalSystem {
public:
    [[nodiscard]] const OscillatorKind& kind() const { return kind_; }
    [[nodiscard]] const OscillatorParams& params() const { return params_; }
    [[nodiscard]] const CollocationGrid& grid() const { return grid_; }
    [[nodiscard]] int dim() const { return kind_.dim(); }
    [[nodiscard]] Eigen::Index size() const { return matrix_.rows(); }

    /// Unfactorized block matrix; row block j = node, column block m = basis function.
    [[nodiscard]] const Eigen::MatrixXd& matrix() const { return matrix_; }
    [[nodiscard]] const Eigen::PartialPivLU<Eigen::MatrixXd>& factorization() const { return lu_; }
    /// True when the system is solved through the truncated SVD instead of the LU factors.
    [[nodiscard]] bool pseudo_inverse() const { return use_svd_; }
    [[nodiscard]] const Eigen::BDCSVD<Eigen::MatrixXd>& svd() const { return svd_; }
    [[nodiscard]] const Eigen::VectorXd& w_lo() const { return w_lo_; }
    [[nodiscard]] const Eigen::VectorXd& w_hi() const { return w_hi_; }

private:
    SubintervalSystem(OscillatorKind kind, OscillatorParams params, CollocationGrid grid);
    friend SubintervalSystem assemble(const OscillatorKind&, const OscillatorParams&, double, double, int,
                                      SingularPolicy);

    OscillatorKind kind_;
    OscillatorParams params_;
    CollocationGrid grid_;
    Eigen::MatrixXd matrix_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    Eigen::BDCSVD<Eigen::MatrixXd> svd_;
    bool use_svd_ = false;
    Eigen::VectorXd w_lo_;
    Eigen::VectorXd w_hi_;
};

/// Builds and factorizes the collocation system on [lo, hi] with n nodes.
/// Throws std::domain_error for lo <= 0 or lo >= hi, std::invalid_argument
/// for odd n. A singular matrix (see kLuConditionLimit) raises
/// DegenerateSystemError under SingularPolicy::Throw and is decomposed by a
/// truncated SVD under SingularPolicy::PseudoInverse.
SubintervalSystem assemble(const OscillatorKind& kind, const OscillatorParams& params, double lo, double hi, int n,
                           SingularPolicy policy = SingularPolicy::Throw);

/// Coefficients c (n*d entries, basis-major) for one integrand sampled at the grid nodes.
Eigen::VectorXd solve_rhs(const SubintervalSystem& system, const Eigen::VectorXd& f_at_nodes);

/// Column-wise solve for several integrands (one column each); every column
/// is solved exactly as a separate call would.
Eigen::MatrixXd solve_rhs(const SubintervalSystem& system, const Eigen::MatrixXd& f_at_nodes);

/// <p, w>(hi) - <p, w>(lo) for coefficient vector c.
double interval_integral(const SubintervalSystem& system, const Eigen::VectorXd& c);

/// One value per column of c.
std::vector<double> interval_integral(const SubintervalSystem& system, const Eigen::MatrixXd& c);

/// Weights z_j such that interval_integral(solve_rhs(f)) = sum_j z_j f(x_j),
/// from one transposed solve against the stored factorization.
Eigen::VectorXd node_weights(const SubintervalSystem& system);

/// p(x) and p'(x) for coefficient vector c; used for residual diagnostics.
struct PolynomialState {
    Eigen::VectorXd value;
    Eigen::VectorXd derivative;
};
PolynomialState evaluate_p(const SubintervalSystem& system, const Eigen::VectorXd& c, double x);

/// Number of collocation matrices factorized by this process so far.
std::uint64_t factorization_count();

}  // namespace levin
