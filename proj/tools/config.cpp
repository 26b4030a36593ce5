#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "levin/problems.hpp"

namespace levin::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string strip_comment(const std::string& line) {
    const auto hash = line.find('#');
    return hash == std::string::npos ? line : line.substr(0, hash);
}

std::string where(const std::filesystem::path& file, int line) {
    return file.string() + ":" + std::to_string(line);
}

std::optional<double> to_double(const std::string& token) {
    const std::string t = trim(token);
    if (t.empty()) {
        return std::nullopt;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
        return std::nullopt;
    }
    return v;
}

std::optional<long long> to_integer(const std::string& token) {
    const std::string t = trim(token);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        return std::nullopt;
    }
    return v;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::string s = line;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::replace(s.begin(), s.end(), '\t', ' ');
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) {
        out.push_back(tok);
    }
    return out;
}

bool parse_bool(const std::string& v, bool& out) {
    std::string s = v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") {
        out = true;
        return true;
    }
    if (s == "false" || s == "0" || s == "no" || s == "off") {
        out = false;
        return true;
    }
    return false;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    const std::filesystem::path p(value);
    return p.is_absolute() ? p : base.parent_path() / p;
}

struct Entry {
    std::string value;
    int line = 0;
};

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<double> parse_list(const std::string& text) {
    const std::string t = trim(text);
    for (const char* fn : {"logspace", "linspace"}) {
        const std::string name(fn);
        if (t.rfind(name + "(", 0) == 0 && t.back() == ')') {
            const auto args = split_fields(t.substr(name.size() + 1, t.size() - name.size() - 2));
            if (args.size() != 3) {
                throw std::invalid_argument(name + " takes (lo, hi, n)");
            }
            const auto lo = to_double(args[0]);
            const auto hi = to_double(args[1]);
            const auto n = to_integer(args[2]);
            if (!lo || !hi || !n || *n < 1) {
                throw std::invalid_argument("bad " + name + " arguments '" + t + "'");
            }
            if (name == "logspace") {
                if (!(*lo > 0.0) || !(*hi > 0.0)) {
                    throw std::invalid_argument("logspace bounds must be positive");
                }
                return log_space(*lo, *hi, static_cast<std::size_t>(*n));
            }
            std::vector<double> out(static_cast<std::size_t>(*n));
            for (long long i = 0; i < *n; ++i) {
                out[static_cast<std::size_t>(i)] =
                    *n == 1 ? *lo : *lo + (*hi - *lo) * static_cast<double>(i) / static_cast<double>(*n - 1);
            }
            return out;
        }
    }
    std::vector<double> out;
    for (const std::string& tok : split_fields(t)) {
        const auto v = to_double(tok);
        if (!v) {
            throw std::invalid_argument("'" + tok + "' is not a number");
        }
        out.push_back(*v);
    }
    return out;
}

JobConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string() + ": cannot open config file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

JobConfig parse_config(const std::string& text, const std::filesystem::path& source) {
    static const std::set<std::string> known{
        "type",  "integrand", "log_x", "log_y", "n_sub", "max_bisections", "rel_acc", "low_freq_threshold",
        "verbose", "batch",   "a",     "b",     "k",     "k1",             "k2",      "k3",
        "ell",   "ell1",      "ell2",  "ell3",  "diagonal", "output",      "threads"};
    std::map<std::string, Entry> entries;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where(source, line_no) + ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known.contains(key)) {
            throw ConfigError(where(source, line_no) + ": unknown key '" + key + "'");
        }
        if (entries.contains(key)) {
            throw ConfigError(where(source, line_no) + ": field '" + key + "' repeated (first set on line " +
                              std::to_string(entries[key].line) + ")");
        }
        entries[key] = Entry{value, line_no};
    }

    auto fail = [&](const std::string& key, const std::string& why) -> ConfigError {
        return ConfigError(where(source, entries.at(key).line) + ": field '" + key + "': " + why);
    };
    auto get_int = [&](const std::string& key, int& out) {
        if (!entries.contains(key)) {
            return;
        }
        const auto v = to_integer(entries[key].value);
        if (!v) {
            throw fail(key, "expected an integer, got '" + entries[key].value + "'");
        }
        out = static_cast<int>(*v);
    };
    auto get_double = [&](const std::string& key, double& out) {
        if (!entries.contains(key)) {
            return;
        }
        const auto v = to_double(entries[key].value);
        if (!v) {
            throw fail(key, "expected a number, got '" + entries[key].value + "'");
        }
        out = *v;
    };
    auto get_bool = [&](const std::string& key, bool& out) {
        if (entries.contains(key) && !parse_bool(entries[key].value, out)) {
            throw fail(key, "expected true or false, got '" + entries[key].value + "'");
        }
    };
    auto get_list = [&](const std::string& key) {
        try {
            return parse_list(entries.at(key).value);
        } catch (const std::invalid_argument& e) {
            throw fail(key, e.what());
        }
    };

    JobConfig cfg;
    cfg.source = source;
    cfg.text = text;

    if (!entries.contains("type")) {
        throw ConfigError(source.string() + ": missing required field 'type'");
    }
    int type_code = 0;
    get_int("type", type_code);
    try {
        cfg.type = integral_type_from_code(type_code);
    } catch (const std::invalid_argument& e) {
        throw fail("type", e.what());
    }
    if (!entries.contains("integrand")) {
        throw ConfigError(source.string() + ": missing required field 'integrand'");
    }
    cfg.integrand_path = resolve(source, entries["integrand"].value);
    get_bool("log_x", cfg.log_x);
    get_bool("log_y", cfg.log_y);
    get_int("n_sub", cfg.settings.n_sub);
    get_int("max_bisections", cfg.settings.max_bisections);
    get_double("rel_acc", cfg.settings.rel_acc);
    get_double("low_freq_threshold", cfg.settings.low_freq_threshold);
    get_bool("verbose", cfg.settings.verbose);
    get_bool("diagonal", cfg.request.diagonal);
    try {
        cfg.settings.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source.string() + ": settings: " + e.what());
    }
    if (entries.contains("output")) {
        cfg.output_path = resolve(source, entries["output"].value);
    }
    if (entries.contains("threads")) {
        int t = 0;
        get_int("threads", t);
        if (t < 1) {
            throw fail("threads", "must be >= 1");
        }
        cfg.threads = t;
    }

    const int count = oscillator_kind(cfg.type).count;
    const bool has_inline = entries.contains("k") || entries.contains("k1") || entries.contains("a") ||
                            entries.contains("b") || entries.contains("ell") || entries.contains("ell1");
    if (entries.contains("batch")) {
        if (has_inline) {
            throw fail("batch", "give either a batch file or inline a, b, k, ell fields, not both");
        }
        cfg.batch_path = resolve(source, entries["batch"].value);
        const bool diagonal = cfg.request.diagonal;
        cfg.request = load_batch(*cfg.batch_path, count, cfg.row_lines);
        cfg.request.diagonal = diagonal;
        return cfg;
    }

    // Inline grid: every field is a list; length-1 lists broadcast.
    std::vector<std::pair<std::string, std::vector<double>>> columns;
    for (const char* key : {"a", "b"}) {
        if (!entries.contains(key)) {
            throw ConfigError(source.string() + ": missing field '" + key + "' (or a batch file)");
        }
        columns.emplace_back(key, get_list(key));
    }
    for (const char* base : {"k", "ell"}) {
        for (int i = 1; i <= count; ++i) {
            const std::string indexed = base + std::to_string(i);
            if (entries.contains(indexed)) {
                columns.emplace_back(indexed, get_list(indexed));
            } else if (entries.contains(base)) {
                columns.emplace_back(base, get_list(base));
            } else {
                throw ConfigError(source.string() + ": missing field '" + base + "' or '" + indexed + "'");
            }
        }
        for (int i = count + 1; i <= 3; ++i) {
            const std::string indexed = base + std::to_string(i);
            if (entries.contains(indexed)) {
                throw fail(indexed, std::string(integral_type_name(cfg.type)) + " integrals have " +
                                        std::to_string(count) + " Bessel factor(s)");
            }
        }
    }
    std::size_t m = 1;
    for (const auto& [key, values] : columns) {
        if (values.empty()) {
            throw fail(key, "empty batch");
        }
        if (values.size() != 1) {
            if (m != 1 && values.size() != m) {
                throw fail(key, "has " + std::to_string(values.size()) + " entries, other fields have " +
                                    std::to_string(m));
            }
            m = values.size();
        }
    }
    auto expand = [m](const std::vector<double>& v) { return v.size() == 1 ? std::vector<double>(m, v[0]) : v; };
    cfg.request.a = expand(columns[0].second);
    cfg.request.b = expand(columns[1].second);
    for (int i = 0; i < count; ++i) {
        cfg.request.k.push_back(expand(columns[2 + static_cast<std::size_t>(i)].second));
        const auto& [key, ell_values] = columns[2 + static_cast<std::size_t>(count + i)];
        std::vector<int> ell;
        for (double v : expand(ell_values)) {
            if (v != std::floor(v) || std::abs(v) > 1e6) {
                throw fail(key, "orders must be integers");
            }
            ell.push_back(static_cast<int>(v));
        }
        cfg.request.ell.push_back(std::move(ell));
    }
    cfg.row_lines.assign(m, 0);
    return cfg;
}

IntegrandTable load_integrand(const std::filesystem::path& path, bool log_x, bool log_y) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string() + ": cannot open integrand file");
    }
    std::vector<double> x;
    std::vector<std::vector<double>> rows;
    std::string raw;
    int line_no = 0;
    bool seen_data = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto fields = split_fields(line);
        std::vector<double> row;
        bool numeric = true;
        for (const auto& f : fields) {
            const auto v = to_double(f);
            if (!v) {
                numeric = false;
                break;
            }
            row.push_back(*v);
        }
        if (!numeric) {
            if (!seen_data) {
                seen_data = true;  // header row
                continue;
            }
            throw ConfigError(where(path, line_no) + ": non-numeric value in data row");
        }
        seen_data = true;
        if (row.size() < 2) {
            throw ConfigError(where(path, line_no) + ": need x and at least one integrand column");
        }
        if (!rows.empty() && row.size() != rows.front().size() + 1) {
            throw ConfigError(where(path, line_no) + ": has " + std::to_string(row.size()) + " columns, expected " +
                              std::to_string(rows.front().size() + 1));
        }
        x.push_back(row[0]);
        rows.emplace_back(row.begin() + 1, row.end());
    }
    if (rows.empty()) {
        throw ConfigError(path.string() + ": no data rows");
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        }
    }
    try {
        return IntegrandTable(std::move(x), std::move(values), log_x, log_y);
    } catch (const std::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

BatchRequest load_batch(const std::filesystem::path& path, int bessel_count, std::vector<int>& row_lines) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string() + ": cannot open batch file");
    }
    const std::size_t width = 2 + 2 * static_cast<std::size_t>(bessel_count);
    BatchRequest req;
    req.k.resize(static_cast<std::size_t>(bessel_count));
    req.ell.resize(static_cast<std::size_t>(bessel_count));
    row_lines.clear();
    std::string raw;
    int line_no = 0;
    bool seen_data = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto fields = split_fields(line);
        std::vector<double> row;
        for (const auto& f : fields) {
            const auto v = to_double(f);
            if (!v) {
                break;
            }
            row.push_back(*v);
        }
        if (row.size() != fields.size()) {
            if (!seen_data) {
                seen_data = true;
                continue;
            }
            throw ConfigError(where(path, line_no) + ": row " + std::to_string(row_lines.size() + 1) +
                              ": non-numeric value");
        }
        seen_data = true;
        const std::string row_text = "row " + std::to_string(row_lines.size() + 1);
        if (row.size() != width) {
            throw ConfigError(where(path, line_no) + ": " + row_text + ": expected " + std::to_string(width) +
                              " columns (a b k1.. ell1..), got " + std::to_string(row.size()));
        }
        req.a.push_back(row[0]);
        req.b.push_back(row[1]);
        for (int i = 0; i < bessel_count; ++i) {
            req.k[static_cast<std::size_t>(i)].push_back(row[2 + static_cast<std::size_t>(i)]);
            const double ell = row[2 + static_cast<std::size_t>(bessel_count + i)];
            if (ell != std::floor(ell) || std::abs(ell) > 1e6) {
                throw ConfigError(where(path, line_no) + ": " + row_text + ": field 'ell" + std::to_string(i + 1) +
                                  "' must be an integer");
            }
            req.ell[static_cast<std::size_t>(i)].push_back(static_cast<int>(ell));
        }
        row_lines.push_back(line_no);
    }
    return req;
}

void validate_rows(const JobConfig& cfg, const IntegrandTable& table) {
    const BatchRequest& req = cfg.request;
    if (req.size() == 0) {
        throw ConfigError((cfg.batch_path ? cfg.batch_path->string() : cfg.source.string()) + ": empty batch");
    }
    const double lo = table.x().front();
    const double hi = table.x().back();
    for (std::size_t m = 0; m < req.size(); ++m) {
        std::string at = "row " + std::to_string(m + 1);
        if (cfg.batch_path) {
            at = where(*cfg.batch_path, cfg.row_lines[m]) + ": " + at;
        } else {
            at = cfg.source.string() + ": " + at;
        }
        auto bad = [&](const std::string& field, const std::string& why) {
            return ConfigError(at + ": field '" + field + "': " + why);
        };
        const double a = req.a[m];
        const double b = req.b[m];
        if (!std::isfinite(a) || !(a > 0.0)) {
            throw bad("a", "must be finite and positive");
        }
        if (!std::isfinite(b) || !(a < b)) {
            throw bad("b", "a must be below b (a = " + std::to_string(a) + ", b = " + std::to_string(b) + ")");
        }
        if (a < lo || b > hi) {
            throw bad(a < lo ? "a" : "b", "outside the tabulated range [" + std::to_string(lo) + ", " +
                                              std::to_string(hi) + "]");
        }
        for (std::size_t i = 0; i < req.k.size(); ++i) {
            if (!std::isfinite(req.k[i][m]) || !(req.k[i][m] > 0.0)) {
                throw bad("k" + std::to_string(i + 1), "must be finite and positive");
            }
            if (req.ell[i][m] < 0) {
                throw bad("ell" + std::to_string(i + 1), "must be >= 0");
            }
        }
    }
    if (req.diagonal && req.size() != table.n_integrands()) {
        throw ConfigError(cfg.source.string() + ": field 'diagonal': needs as many tuples (" +
                          std::to_string(req.size()) + ") as integrands (" + std::to_string(table.n_integrands()) +
                          ")");
    }
}

}  // namespace levin::cli
