#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace levin {

/// Tabulated non-oscillatory integrands sharing one abscissa grid.
///
/// `values` has one row per grid point and one column per integrand; the
/// column dimension is always present, even for a single integrand. With
/// `log_x` the spline abscissa is ln(x); with `log_y` the ordinate is ln(f),
/// which requires every value to be positive.
class IntegrandTable {
public:
    static constexpr std::size_t kMinPoints = 4;

    IntegrandTable(std::vector<double> x, Eigen::MatrixXd values, bool log_x, bool log_y);

    [[nodiscard]] const std::vector<double>& x() const { return x_; }
    [[nodiscard]] const Eigen::MatrixXd& values() const { return values_; }
    [[nodiscard]] bool log_x() const { return log_x_; }
    [[nodiscard]] bool log_y() const { return log_y_; }
    [[nodiscard]] std::size_t size() const { return x_.size(); }
    [[nodiscard]] std::size_t n_integrands() const { return static_cast<std::size_t>(values_.cols()); }

    /// Identifies the grid and flags. Tables produced by update_values share
    /// the token of the table they were derived from.
    [[nodiscard]] std::uint64_t grid_token() const { return token_; }

private:
    IntegrandTable(const IntegrandTable& base, Eigen::MatrixXd values);
    friend IntegrandTable update_values(const IntegrandTable& table, Eigen::MatrixXd new_values);

    std::vector<double> x_;
    Eigen::MatrixXd values_;
    bool log_x_;
    bool log_y_;
    std::uint64_t token_;
};

/// Same grid and flags, new values. Throws std::invalid_argument on a shape
/// mismatch or a non-positive value in log_y mode.
IntegrandTable update_values(const IntegrandTable& table, Eigen::MatrixXd new_values);

/// Natural cubic splines, one per integrand column, in the transformed space
/// of the table. Immutable once built.
class Interpolant {
public:
    explicit Interpolant(const IntegrandTable& table);

    [[nodiscard]] std::size_t n_integrands() const { return columns_.size(); }
    [[nodiscard]] double x_min() const { return x_min_; }
    [[nodiscard]] double x_max() const { return x_max_; }
    [[nodiscard]] std::uint64_t grid_token() const { return token_; }

    /// Spline position of one abscissa. Valid for every interpolant with the
    /// same grid token, so it can be computed once and reused after updates.
    struct Sample {
        std::size_t seg = 0;
        bool knot = false;  ///< x is grid point `seg`
        double a = 0.0;
        double b = 0.0;
        double ca = 0.0;
        double cb = 0.0;
        double hh = 0.0;
    };

    /// Throws std::out_of_range outside [x_min, x_max].
    [[nodiscard]] Sample sample(double x) const;
    [[nodiscard]] double operator()(const Sample& s, std::size_t column) const;

    /// f_column(x). Throws std::out_of_range outside [x_min, x_max].
    [[nodiscard]] double operator()(double x, std::size_t column) const { return (*this)(sample(x), column); }

    /// All columns at x.
    [[nodiscard]] std::vector<double> evaluate(double x) const;

private:
    struct Column {
        std::vector<double> raw;     // tabulated values, returned exactly at the knots
        std::vector<double> y;
        std::vector<double> second;  // spline second derivatives at the knots
    };

    [[nodiscard]] std::size_t locate(double u) const;
    [[nodiscard]] double transformed_abscissa(double x) const;

    std::vector<double> x_;
    std::vector<double> u_;
    std::vector<Column> columns_;
    double x_min_ = 0.0;
    double x_max_ = 0.0;
    bool log_x_ = false;
    bool log_y_ = false;
    std::uint64_t token_ = 0;
};

inline Interpolant build(const IntegrandTable& table) { return Interpolant(table); }

}  // namespace levin
