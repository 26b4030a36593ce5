#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "levin/session.hpp"

namespace levin::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNotConverged = 2;

struct IntegrateOptions {
    std::filesystem::path config;
    std::optional<int> threads;  ///< overrides the environment and the config
    std::optional<std::filesystem::path> out;
};

/// Worker count: flag, then LEVIN_THREADS, then the config, then 1.
int resolve_threads(std::optional<int> flag, std::optional<int> from_config);

int cmd_integrate(const IntegrateOptions& options, std::ostream& out, std::ostream& err);

struct SelftestOptions {
    bool quick = false;
    std::string inject_fault;  ///< "a-sign" flips the sign of the frequency terms of A
};

int cmd_selftest(const SelftestOptions& options, std::ostream& out, std::ostream& err);

struct BenchOptions {
    std::string problem;
    std::optional<std::filesystem::path> out;
    std::size_t points = 0;
    std::optional<int> threads;
};

int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err);

/// Writes the result table with its '#' metadata header.
void write_result(std::ostream& os, const JobConfig& cfg, const BatchResult& result, int threads);

/// Reads the value columns of a table written by write_result.
struct ParsedResult {
    Eigen::MatrixXd values;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> converged;
};
ParsedResult read_result(std::istream& is);

}  // namespace levin::cli
