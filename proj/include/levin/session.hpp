#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <vector>

#include <Eigen/Dense>

#include "levin/adaptive.hpp"
#include "levin/integrand.hpp"

namespace levin {

/// The six integral shapes, numbered as on the command line.
enum class IntegralType : int {
    SingleSpherical = 0,
    SingleCylindrical = 1,
    DoubleSpherical = 2,
    DoubleCylindrical = 3,
    TripleSpherical = 4,
    TripleCylindrical = 5,
};

/// Throws std::invalid_argument for codes outside 0..5.
IntegralType integral_type_from_code(int code);
OscillatorKind oscillator_kind(IntegralType type);
const char* integral_type_name(IntegralType type);

/// M parameter tuples. `k` and `ell` hold one array per Bessel factor, each
/// of length M, as do `a` and `b`.
struct BatchRequest {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<std::vector<double>> k;
    std::vector<std::vector<int>> ell;
    bool diagonal = false;

    [[nodiscard]] std::size_t size() const { return a.size(); }
};

/// Values and convergence flags. Full mode: M x n_integrands. Diagonal mode:
/// M x 1, row m holding integrand m paired with tuple m.
struct BatchResult {
    bool diagonal = false;
    Eigen::MatrixXd values;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> converged;

    [[nodiscard]] bool all_converged() const { return converged.size() == 0 || converged.all(); }
    /// Rows with at least one non-converged entry.
    [[nodiscard]] std::vector<std::size_t> nonconverged_rows() const;
};

/// Work done by the most recent integrate_batch call.
struct BatchStats {
    std::uint64_t factorizations = 0;
    std::size_t unique_tuples = 0;
    std::size_t cold_columns = 0;
    std::size_t warm_columns = 0;
};

/// Batch integration against a fixed integrand table, caching one bisection
/// tree per parameter tuple for reuse after update_integrand.
///
/// integrate_batch may run its entries on several threads. update_integrand
/// and set_levin take the session exclusively and wait for running batches.
class Session {
public:
    Session(IntegralType type, IntegrandTable table, LevinSettings settings = {});

    [[nodiscard]] IntegralType type() const { return type_; }
    [[nodiscard]] const IntegrandTable& table() const { return table_; }
    [[nodiscard]] const Interpolant& interpolant() const { return *interp_; }
    [[nodiscard]] const LevinSettings& settings() const { return settings_; }
    [[nodiscard]] std::size_t n_integrands() const { return table_.n_integrands(); }

    /// Replaces the settings and drops every cached tree.
    void set_levin(const LevinSettings& settings);
    /// Positional form of the original interface. `boost_bessel` selects a
    /// special-function backend there; there is one backend here, so it is ignored.
    void set_levin(int n_sub, int max_bisections, double rel_acc, bool boost_bessel, bool verbose);

    void set_threads(int threads);
    [[nodiscard]] int threads() const { return threads_; }

    BatchResult integrate_batch(const BatchRequest& request);

    /// New values on the same grid; cached trees are kept, so the next batch
    /// over the same tuples only re-weights the new samples.
    void update_integrand(Eigen::MatrixXd values);
    /// Same, taking a full table that must match grid, flags and shape.
    void update_integrand(const IntegrandTable& table);

    [[nodiscard]] std::size_t cache_size() const;
    void clear_cache();
    [[nodiscard]] BatchStats last_stats() const { return stats_; }

private:
    struct TupleKey {
        double a = 0.0;
        double b = 0.0;
        std::array<double, 3> k{};
        std::array<int, 3> ell{};
        friend auto operator<=>(const TupleKey&, const TupleKey&) = default;
    };

    void validate_request(const BatchRequest& request) const;
    [[nodiscard]] TupleKey key_of(const BatchRequest& request, std::size_t m) const;
    [[nodiscard]] IntegralSpec spec_of(const TupleKey& key) const;

    IntegralType type_;
    IntegrandTable table_;
    std::unique_ptr<Interpolant> interp_;
    LevinSettings settings_;
    int threads_ = 1;
    BatchStats stats_;

    mutable std::shared_mutex session_mutex_;
    mutable std::shared_mutex cache_mutex_;
    std::map<TupleKey, std::shared_ptr<const BisectionTree>> cache_;
};

}  // namespace levin
