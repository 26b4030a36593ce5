#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "levin/adaptive.hpp"
#include "levin/integrand.hpp"
#include "levin/session.hpp"

namespace levin::cli {

/// Parse or validation failure; the message names the file, line and field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct JobConfig {
    std::filesystem::path source;
    std::string text;  ///< raw config contents, hashed into the output header
    IntegralType type = IntegralType::SingleSpherical;
    std::filesystem::path integrand_path;
    bool log_x = true;
    bool log_y = true;
    LevinSettings settings;
    std::optional<std::filesystem::path> batch_path;
    BatchRequest request;
    std::vector<int> row_lines;  ///< source line of each tuple (0 for inline grids)
    std::optional<std::filesystem::path> output_path;
    std::optional<int> threads;
};

/// Reads `key = value` lines; '#' starts a comment. Relative paths resolve
/// against the config file's directory.
JobConfig load_config(const std::filesystem::path& path);

/// Parses config text as if read from `source`.
JobConfig parse_config(const std::string& text, const std::filesystem::path& source);

/// Whitespace- or comma-delimited table: x then one column per integrand.
/// An optional non-numeric header row and '#' comment lines are skipped.
IntegrandTable load_integrand(const std::filesystem::path& path, bool log_x, bool log_y);

/// Rows of a k1..kN ell1..ellN (optionally preceded by a b) per tuple; see README.
BatchRequest load_batch(const std::filesystem::path& path, int bessel_count, std::vector<int>& row_lines);

/// Checks every tuple against the table range; errors cite 1-based rows.
void validate_rows(const JobConfig& config, const IntegrandTable& table);

std::uint64_t fnv1a(const std::string& text);

/// Values in the order "1e-3", "1,2,3", "logspace(lo, hi, n)" or "linspace(lo, hi, n)".
std::vector<double> parse_list(const std::string& text);

}  // namespace levin::cli
