#include "levin/integrand.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

namespace levin {

namespace {

std::atomic<std::uint64_t> g_next_token{1};

void check_values(const Eigen::MatrixXd& values, std::size_t rows, bool log_y) {
    if (static_cast<std::size_t>(values.rows()) != rows) {
        throw std::invalid_argument("integrand values have " + std::to_string(values.rows()) + " rows, grid has " +
                                    std::to_string(rows) + " points");
    }
    if (values.cols() < 1) {
        throw std::invalid_argument("integrand values need at least one column");
    }
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        for (Eigen::Index r = 0; r < values.rows(); ++r) {
            const double v = values(r, c);
            if (!std::isfinite(v)) {
                throw std::invalid_argument("integrand value at row " + std::to_string(r) + ", column " +
                                            std::to_string(c) + " is not finite");
            }
            if (log_y && !(v > 0.0)) {
                throw std::invalid_argument("log_y requires positive values; row " + std::to_string(r) +
                                            ", column " + std::to_string(c) + " is " + std::to_string(v));
            }
        }
    }
}

// Second derivatives of the natural cubic spline through (u, y).
std::vector<double> natural_spline_moments(const std::vector<double>& u, const std::vector<double>& y) {
    const std::size_t n = u.size();
    std::vector<double> m(n, 0.0);
    if (n < 3) {
        return m;
    }
    // Thomas algorithm on the interior equations; m[0] = m[n-1] = 0.
    std::vector<double> diag(n, 0.0);
    std::vector<double> rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = u[i] - u[i - 1];
        const double h1 = u[i + 1] - u[i];
        diag[i] = 2.0 * (h0 + h1);
        rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double lower = u[i] - u[i - 1];
        const double factor = lower / diag[i - 1];
        diag[i] -= factor * lower;
        rhs[i] -= factor * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        const double upper = u[i + 1] - u[i];
        m[i] = (rhs[i] - upper * m[i + 1]) / diag[i];
    }
    return m;
}

}  // namespace

IntegrandTable::IntegrandTable(std::vector<double> x, Eigen::MatrixXd values, bool log_x, bool log_y)
    : x_(std::move(x)), values_(std::move(values)), log_x_(log_x), log_y_(log_y), token_(g_next_token++) {
    if (x_.size() < kMinPoints) {
        throw std::invalid_argument("integrand grid needs at least " + std::to_string(kMinPoints) + " points, got " +
                                    std::to_string(x_.size()));
    }
    for (std::size_t i = 0; i < x_.size(); ++i) {
        if (!std::isfinite(x_[i]) || !(x_[i] > 0.0)) {
            throw std::invalid_argument("grid point " + std::to_string(i) + " must be finite and positive");
        }
        if (i > 0 && !(x_[i] > x_[i - 1])) {
            throw std::invalid_argument("grid is not strictly increasing at index " + std::to_string(i));
        }
    }
    check_values(values_, x_.size(), log_y_);
}

IntegrandTable::IntegrandTable(const IntegrandTable& base, Eigen::MatrixXd values)
    : x_(base.x_), values_(std::move(values)), log_x_(base.log_x_), log_y_(base.log_y_), token_(base.token_) {}

IntegrandTable update_values(const IntegrandTable& table, Eigen::MatrixXd new_values) {
    if (new_values.rows() != table.values().rows() || new_values.cols() != table.values().cols()) {
        throw std::invalid_argument("updated integrand has shape " + std::to_string(new_values.rows()) + "x" +
                                    std::to_string(new_values.cols()) + ", expected " +
                                    std::to_string(table.values().rows()) + "x" +
                                    std::to_string(table.values().cols()));
    }
    check_values(new_values, table.size(), table.log_y());
    return IntegrandTable(table, std::move(new_values));
}

Interpolant::Interpolant(const IntegrandTable& table)
    : x_min_(table.x().front()),
      x_max_(table.x().back()),
      log_x_(table.log_x()),
      log_y_(table.log_y()),
      token_(table.grid_token()) {
    const auto& x = table.x();
    x_ = x;
    u_.resize(x.size());
    std::transform(x.begin(), x.end(), u_.begin(), [this](double v) { return transformed_abscissa(v); });
    columns_.resize(table.n_integrands());
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        auto& col = columns_[c];
        col.y.resize(x.size());
        col.raw.resize(x.size());
        for (std::size_t r = 0; r < x.size(); ++r) {
            const double v = table.values()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            col.raw[r] = v;
            col.y[r] = log_y_ ? std::log(v) : v;
        }
        col.second = natural_spline_moments(u_, col.y);
    }
}

double Interpolant::transformed_abscissa(double x) const { return log_x_ ? std::log(x) : x; }

std::size_t Interpolant::locate(double u) const {
    const auto it = std::upper_bound(u_.begin(), u_.end(), u);
    const auto idx = static_cast<std::size_t>(std::distance(u_.begin(), it));
    return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, u_.size() - 2);
}

Interpolant::Sample Interpolant::sample(double x) const {
    if (!(x >= x_min_ && x <= x_max_)) {
        throw std::out_of_range("integrand evaluated at " + std::to_string(x) + " outside the tabulated range [" +
                                std::to_string(x_min_) + ", " + std::to_string(x_max_) + "]");
    }
    Sample s;
    const auto node = std::lower_bound(x_.begin(), x_.end(), x);
    if (node != x_.end() && *node == x) {
        s.seg = static_cast<std::size_t>(node - x_.begin());
        s.knot = true;
        return s;
    }
    const double u = transformed_abscissa(x);
    s.seg = locate(u);
    const double h = u_[s.seg + 1] - u_[s.seg];
    s.a = (u_[s.seg + 1] - u) / h;
    s.b = (u - u_[s.seg]) / h;
    s.ca = s.a * s.a * s.a - s.a;
    s.cb = s.b * s.b * s.b - s.b;
    s.hh = h * h;
    return s;
}

double Interpolant::operator()(const Sample& s, std::size_t column) const {
    const Column& col = columns_.at(column);
    if (s.knot) {
        return col.raw[s.seg];
    }
    const double y = s.a * col.y[s.seg] + s.b * col.y[s.seg + 1] +
                     (s.ca * col.second[s.seg] + s.cb * col.second[s.seg + 1]) * s.hh / 6.0;
    return log_y_ ? std::exp(y) : y;
}

std::vector<double> Interpolant::evaluate(double x) const {
    std::vector<double> out(columns_.size());
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        out[c] = (*this)(x, c);
    }
    return out;
}

}  // namespace levin
