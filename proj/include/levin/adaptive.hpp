#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "levin/bessel.hpp"
#include "levin/integrand.hpp"

namespace levin {

/// Collocation and bisection controls.
struct LevinSettings {
    int n_sub = 10;                   ///< collocation points per subinterval (even, >= 4)
    int max_bisections = 32;          ///< bisection steps allowed per integral
    double rel_acc = 1e-4;            ///< target aggregate relative error
    double low_freq_threshold = 1.0;  ///< max_i k_i * width at or below which plain quadrature is used
    bool verbose = false;

    void validate() const;
    /// Points of the comparison solution: n_sub / 2, rounded up to even.
    [[nodiscard]] int coarse_points() const;
};

/// One integral of the batch: oscillator plus limits.
struct IntegralSpec {
    OscillatorKind kind;
    OscillatorParams params;
    double a = 0.0;
    double b = 0.0;

    friend bool operator==(const IntegralSpec&, const IntegralSpec&) = default;
};

enum class LeafMethod { Levin, Quadrature };

/// Integrand-independent part of one subinterval: the integral over [lo, hi]
/// is sum_j weights[j] * f(nodes[j]) at both resolutions. For Levin leaves
/// the weights come from the factorized collocation system; for quadrature
/// leaves they are Gauss-Legendre weights times the leading oscillator.
struct LeafRule {
    double lo = 0.0;
    double hi = 0.0;
    LeafMethod method = LeafMethod::Levin;
    std::vector<double> fine_nodes;
    std::vector<double> fine_weights;
    std::vector<double> coarse_nodes;
    std::vector<double> coarse_weights;
    /// Spline positions of the nodes, filled when the rule is bound to a grid.
    std::vector<Interpolant::Sample> fine_samples;
    std::vector<Interpolant::Sample> coarse_samples;
};

/// Builds the rule for [lo, hi]; `factorizations` is incremented by the number
/// of collocation matrices factorized.
LeafRule make_leaf_rule(const IntegralSpec& spec, double lo, double hi, const LevinSettings& settings,
                        std::uint64_t& factorizations);

/// Partition of [a, b] for one integrand column.
struct ColumnTree {
    std::vector<std::shared_ptr<const LeafRule>> leaves;
    bool converged = false;
    int bisections = 0;
    std::vector<double> error_history;  ///< aggregate estimate before each bisection step
};

/// Reusable partitions for one integral specification, one per integrand
/// column, plus a memo of every leaf rule computed so columns share work.
class BisectionTree {
public:
    BisectionTree(IntegralSpec spec, const LevinSettings& settings, std::uint64_t grid_token);

    [[nodiscard]] const IntegralSpec& spec() const { return spec_; }
    [[nodiscard]] int n_sub() const { return n_sub_; }
    [[nodiscard]] double low_freq_threshold() const { return low_freq_threshold_; }
    [[nodiscard]] std::uint64_t grid_token() const { return grid_token_; }

    /// True if a tree built with these arguments would be interchangeable with this one.
    [[nodiscard]] bool compatible(const IntegralSpec& spec, const LevinSettings& settings,
                                  std::uint64_t grid_token) const;

    [[nodiscard]] const ColumnTree* column(std::size_t index) const;
    [[nodiscard]] const std::map<std::size_t, ColumnTree>& columns() const { return columns_; }
    void set_column(std::size_t index, ColumnTree tree);

    /// Memoized leaf rule for [lo, hi], bound to the grid of `interp`.
    std::shared_ptr<const LeafRule> rule(double lo, double hi, const LevinSettings& settings, const Interpolant& interp,
                                         std::uint64_t& factorizations);
    [[nodiscard]] std::size_t memo_size() const { return memo_.size(); }

private:
    IntegralSpec spec_;
    int n_sub_;
    double low_freq_threshold_;
    std::uint64_t grid_token_;
    std::map<std::size_t, ColumnTree> columns_;
    std::map<std::pair<double, double>, std::shared_ptr<const LeafRule>> memo_;
};

/// Starting partition of [a, b]: the limits plus every turning point
/// x = ell_i / k_i strictly inside. Below a turning point the Bessel factor
/// is not oscillatory and a single collocation interval spanning it can
/// agree with itself at n and n/2 while missing that region entirely.
std::vector<double> initial_edges(const IntegralSpec& spec);

/// True if the leaves are ordered, non-empty and cover [a, b] with no gaps or overlaps.
bool tiles_interval(const ColumnTree& column, double a, double b);

/// Per-leaf relative differences |I_n - I_{n/2}| / (|sum I_n| + floor) and their sum.
struct ErrorEstimate {
    std::vector<double> per_leaf;
    double aggregate = 0.0;
};

inline constexpr double kRelativeErrorFloor = 1e-30;

ErrorEstimate estimate_error(std::span<const double> fine, std::span<const double> coarse);

/// Index of the largest estimate; ties go to the leftmost leaf.
std::size_t pick_worst_leaf(std::span<const double> estimates);

/// Gauss-Legendre quadrature with n nodes of f(x) w_1(x) over [lo, hi], one value per integrand.
std::vector<double> low_freq_fallback(const IntegralSpec& spec, const Interpolant& interp, double lo, double hi,
                                      int n);

struct AdaptiveResult {
    std::vector<double> values;   ///< one per requested column
    std::vector<bool> converged;  ///< one per requested column
    BisectionTree tree;
    std::uint64_t factorizations = 0;
    std::size_t warm_columns = 0;
    std::size_t cold_columns = 0;
};

/// Adaptive Levin integration of f_c(x) * w_1(x) over [spec.a, spec.b] for
/// every requested column c (all columns when `columns` is empty).
///
/// Columns already present in `cache` are evaluated on their frozen
/// partition: no assembly or factorization, only new dot products with the
/// current integrand, and the convergence flag is recomputed from the fresh
/// n vs n/2 comparison. Other columns are bisected from scratch.
AdaptiveResult integrate_adaptive(const IntegralSpec& spec, const Interpolant& interp, const LevinSettings& settings,
                                  const BisectionTree* cache = nullptr, std::span<const std::size_t> columns = {});

}  // namespace levin
