#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace levin::selftest {

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    bool quick = false;
    std::uint64_t seed = 20250101;
};

// Kernel checks.
Check bessel_closed_forms();
Check bessel_series_oracle();
Check bessel_recurrence(bool quick);
Check derivative_identity(int samples_per_kind, std::uint64_t seed);
Check kronecker_sum(int samples, std::uint64_t seed);

// Integrand and single-interval checks.
Check spline_reproduction();
Check collocation_residual();

// Integration against closed forms and the reference quadrature.
Check si_single_bessel();
Check hankel_pair(bool quick);
Check double_bessel_oracle(bool quick);

// Batch and reuse invariants.
Check frozen_tree_linearity();
Check diagonal_consistency();
Check batch_loop_equivalence();
Check worker_independence();
Check warm_path_reuse();

std::vector<Check> run_all(const Options& options);

/// One line per check plus a summary line; returns true if every check passed.
bool print_report(std::ostream& os, const std::vector<Check>& checks);

}  // namespace levin::selftest
