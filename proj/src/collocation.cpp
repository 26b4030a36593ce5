#include "levin/collocation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace levin {

namespace {

std::atomic<std::uint64_t> g_factorizations{0};

std::string interval_text(double lo, double hi) {
    return "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
}

}  // namespace

ChebyshevBasis chebyshev_basis(int n, double t) {
    if (!(std::abs(t) <= 1.0)) {
        throw std::domain_error("chebyshev_basis: |t| must be <= 1");
    }
    if (n < 1) {
        throw std::invalid_argument("chebyshev_basis: n must be positive");
    }
    ChebyshevBasis basis;
    basis.values.resize(n);
    basis.derivs.resize(n);
    basis.values[0] = 1.0;
    basis.derivs[0] = 0.0;
    if (n > 1) {
        basis.values[1] = t;
        basis.derivs[1] = 1.0;
    }
    for (int m = 1; m + 1 < n; ++m) {
        basis.values[m + 1] = 2.0 * t * basis.values[m] - basis.values[m - 1];
        basis.derivs[m + 1] = 2.0 * basis.values[m] + 2.0 * t * basis.derivs[m] - basis.derivs[m - 1];
    }
    return basis;
}

CollocationGrid::CollocationGrid(double lo, double hi, int n) : lo_(lo), hi_(hi) {
    if (!(lo < hi)) {
        throw std::domain_error("collocation interval must satisfy lo < hi, got " + interval_text(lo, hi));
    }
    if (n < 2 || n % 2 != 0) {
        throw std::invalid_argument("collocation point count must be even and >= 2, got " + std::to_string(n));
    }
    t_.resize(n);
    nodes_.resize(n);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int j = 0; j < n; ++j) {
        // sin form keeps the reference nodes exactly antisymmetric
        t_[j] = std::sin(std::numbers::pi * (n - 1 - 2 * j) / (2.0 * (n - 1)));
        nodes_[j] = mid + half * t_[j];
    }
    t_.front() = 1.0;
    t_.back() = -1.0;
    nodes_.front() = hi;
    nodes_.back() = lo;
}

double CollocationGrid::to_reference(double x) const {
    const double t = (2.0 * x - (lo_ + hi_)) / (hi_ - lo_);
    return std::clamp(t, -1.0, 1.0);
}

DegenerateSystemError::DegenerateSystemError(double lo, double hi)
    : std::runtime_error("collocation system is singular to working precision on " + interval_text(lo, hi)),
      lo_(lo),
      hi_(hi) {}

SubintervalSystem::SubintervalSystem(OscillatorKind kind, OscillatorParams params, CollocationGrid grid)
    : kind_(kind), params_(std::move(params)), grid_(std::move(grid)) {}

SubintervalSystem assemble(const OscillatorKind& kind, const OscillatorParams& params, double lo, double hi, int n,
                           SingularPolicy policy) {
    if (!(lo > 0.0)) {
        throw std::domain_error("collocation interval must start above 0, got lo = " + std::to_string(lo));
    }
    validate(kind, params);
    SubintervalSystem sys(kind, params, CollocationGrid(lo, hi, n));
    const int d = kind.dim();
    const Eigen::Index size = static_cast<Eigen::Index>(n) * d;
    const double jac = sys.grid_.jacobian();

    sys.matrix_.setZero(size, size);
    for (int j = 0; j < n; ++j) {
        const double x = sys.grid_.nodes()[j];
        const ChebyshevBasis basis = chebyshev_basis(n, sys.grid_.reference_nodes()[j]);
        const Eigen::MatrixXd a = a_matrix(kind, params, x);
        for (int m = 0; m < n; ++m) {
            const double u = basis.values[m];
            const double du = basis.derivs[m] * jac;
            auto block = sys.matrix_.block(static_cast<Eigen::Index>(j) * d, static_cast<Eigen::Index>(m) * d, d, d);
            block = a.transpose() * u;
            block.diagonal().array() += du;
        }
    }

    if (!sys.matrix_.allFinite()) {
        throw DegenerateSystemError(lo, hi);
    }
    sys.lu_.compute(sys.matrix_);
    ++g_factorizations;
    bool singular = false;
    const auto& lu = sys.lu_.matrixLU();
    for (Eigen::Index i = 0; i < size; ++i) {
        const double pivot = lu(i, i);
        if (!std::isfinite(pivot) || pivot == 0.0) {
            singular = true;
        }
    }
    if (singular || (kLuConditionLimit > 0.0 && !(sys.lu_.rcond() > kLuConditionLimit))) {
        if (policy == SingularPolicy::Throw) {
            throw DegenerateSystemError(lo, hi);
        }
        sys.svd_.compute(sys.matrix_, Eigen::ComputeFullU | Eigen::ComputeFullV);
        sys.svd_.setThreshold(kSvdTruncation);
        sys.use_svd_ = true;
    }

    sys.w_lo_ = w_vector(kind, params, lo);
    sys.w_hi_ = w_vector(kind, params, hi);
    return sys;
}

Eigen::VectorXd solve_rhs(const SubintervalSystem& system, const Eigen::VectorXd& f_at_nodes) {
    const int n = system.grid().n();
    if (f_at_nodes.size() != n) {
        throw std::invalid_argument("solve_rhs: expected " + std::to_string(n) + " node values, got " +
                                    std::to_string(f_at_nodes.size()));
    }
    const int d = system.dim();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(system.size());
    for (int j = 0; j < n; ++j) {
        rhs(static_cast<Eigen::Index>(j) * d) = f_at_nodes(j);
    }
    if (system.pseudo_inverse()) {
        return system.svd().solve(rhs);
    }
    return system.factorization().solve(rhs);
}

Eigen::MatrixXd solve_rhs(const SubintervalSystem& system, const Eigen::MatrixXd& f_at_nodes) {
    Eigen::MatrixXd c(system.size(), f_at_nodes.cols());
    for (Eigen::Index col = 0; col < f_at_nodes.cols(); ++col) {
        c.col(col) = solve_rhs(system, Eigen::VectorXd(f_at_nodes.col(col)));
    }
    return c;
}

double interval_integral(const SubintervalSystem& system, const Eigen::VectorXd& c) {
    const int n = system.grid().n();
    const int d = system.dim();
    if (c.size() != system.size()) {
        throw std::invalid_argument("interval_integral: coefficient vector has the wrong length");
    }
    // T_m(1) = 1 and T_m(-1) = (-1)^m
    Eigen::VectorXd p_hi = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd p_lo = Eigen::VectorXd::Zero(d);
    for (int m = 0; m < n; ++m) {
        const auto coeff = c.segment(static_cast<Eigen::Index>(m) * d, d);
        p_hi += coeff;
        if (m % 2 == 0) {
            p_lo += coeff;
        } else {
            p_lo -= coeff;
        }
    }
    return p_hi.dot(system.w_hi()) - p_lo.dot(system.w_lo());
}

std::vector<double> interval_integral(const SubintervalSystem& system, const Eigen::MatrixXd& c) {
    std::vector<double> out(static_cast<std::size_t>(c.cols()));
    for (Eigen::Index col = 0; col < c.cols(); ++col) {
        out[static_cast<std::size_t>(col)] = interval_integral(system, Eigen::VectorXd(c.col(col)));
    }
    return out;
}

Eigen::VectorXd node_weights(const SubintervalSystem& system) {
    const int n = system.grid().n();
    const int d = system.dim();
    Eigen::VectorXd functional(system.size());
    for (int m = 0; m < n; ++m) {
        const double sign = m % 2 == 0 ? 1.0 : -1.0;
        for (int i = 0; i < d; ++i) {
            functional(static_cast<Eigen::Index>(m) * d + i) = system.w_hi()(i) - sign * system.w_lo()(i);
        }
    }
    Eigen::VectorXd z;
    if (system.pseudo_inverse()) {
        // (M^+)^T l = U S^+ V^T l
        const auto& svd = system.svd();
        const Eigen::Index rank = svd.rank();
        const Eigen::VectorXd vt_l = svd.matrixV().leftCols(rank).transpose() * functional;
        const Eigen::VectorXd scaled = vt_l.cwiseQuotient(svd.singularValues().head(rank));
        z = svd.matrixU().leftCols(rank) * scaled;
    } else {
        z = system.factorization().transpose().solve(functional);
    }
    Eigen::VectorXd weights(n);
    for (int j = 0; j < n; ++j) {
        weights(j) = z(static_cast<Eigen::Index>(j) * d);
    }
    return weights;
}

PolynomialState evaluate_p(const SubintervalSystem& system, const Eigen::VectorXd& c, double x) {
    const auto& grid = system.grid();
    const int n = grid.n();
    const int d = system.dim();
    const ChebyshevBasis basis = chebyshev_basis(n, grid.to_reference(x));
    PolynomialState state{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
    for (int m = 0; m < n; ++m) {
        const auto coeff = c.segment(static_cast<Eigen::Index>(m) * d, d);
        state.value += basis.values[m] * coeff;
        state.derivative += basis.derivs[m] * grid.jacobian() * coeff;
    }
    return state;
}

std::uint64_t factorization_count() { return g_factorizations.load(); }

}  // namespace levin
