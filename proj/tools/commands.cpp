#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "levin/bessel.hpp"
#include "levin/oracle.hpp"
#include "levin/problems.hpp"
#include "levin/selftest.hpp"

#ifndef LEVIN_VERSION
#define LEVIN_VERSION "unknown"
#endif

namespace levin::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_settings(std::ostream& os, const LevinSettings& s) {
    os << "# settings: n_sub=" << s.n_sub << " max_bisections=" << s.max_bisections << " rel_acc=" << g17(s.rel_acc)
       << " low_freq_threshold=" << g17(s.low_freq_threshold) << '\n';
}

/// Opens `path` for writing, or returns the fallback stream.
class Sink {
public:
    Sink(const std::optional<std::filesystem::path>& path, std::ostream& fallback) : stream_(&fallback) {
        if (path) {
            file_.open(*path);
            if (!file_) {
                throw ConfigError(path->string() + ": cannot open output file");
            }
            stream_ = &file_;
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

}  // namespace

int resolve_threads(std::optional<int> flag, std::optional<int> from_config) {
    if (flag) {
        if (*flag < 1) {
            throw ConfigError("--threads must be >= 1");
        }
        return *flag;
    }
    if (const char* env = std::getenv("LEVIN_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1) {
            throw ConfigError(std::string("LEVIN_THREADS must be a positive integer, got '") + env + "'");
        }
        return static_cast<int>(v);
    }
    return from_config.value_or(1);
}

void write_result(std::ostream& os, const JobConfig& cfg, const BatchResult& result, int threads) {
    const OscillatorKind kind = oscillator_kind(cfg.type);
    os << "# levin-cli " << LEVIN_VERSION << '\n';
    os << "# config: " << cfg.source.string() << " fnv1a=" << hex64(fnv1a(cfg.text)) << '\n';
    os << "# type: " << static_cast<int>(cfg.type) << " (" << integral_type_name(cfg.type) << ")\n";
    os << "# integrand: " << cfg.integrand_path.string() << " log_x=" << cfg.log_x << " log_y=" << cfg.log_y << '\n';
    write_settings(os, cfg.settings);
    os << "# diagonal: " << result.diagonal << " threads: " << threads << '\n';
    os << "# columns: row a b";
    for (int i = 1; i <= kind.count; ++i) {
        os << " k" << i;
    }
    for (int i = 1; i <= kind.count; ++i) {
        os << " ell" << i;
    }
    const auto cols = result.values.cols();
    for (Eigen::Index c = 0; c < cols; ++c) {
        os << " value_" << (result.diagonal ? std::string("diag") : std::to_string(c));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
        os << " converged_" << (result.diagonal ? std::string("diag") : std::to_string(c));
    }
    os << '\n';
    const BatchRequest& req = cfg.request;
    for (std::size_t m = 0; m < req.size(); ++m) {
        os << m + 1 << ' ' << g17(req.a[m]) << ' ' << g17(req.b[m]);
        for (const auto& k : req.k) {
            os << ' ' << g17(k[m]);
        }
        for (const auto& ell : req.ell) {
            os << ' ' << ell[m];
        }
        const auto r = static_cast<Eigen::Index>(m);
        for (Eigen::Index c = 0; c < cols; ++c) {
            os << ' ' << g17(result.values(r, c));
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            os << ' ' << (result.converged(r, c) ? 1 : 0);
        }
        os << '\n';
    }
}

ParsedResult read_result(std::istream& is) {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("# columns:", 0) == 0) {
            std::istringstream in(line.substr(10));
            std::string name;
            while (in >> name) {
                names.push_back(name);
            }
            continue;
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream in(line);
        std::vector<std::string> fields;
        std::string f;
        while (in >> f) {
            fields.push_back(f);
        }
        if (fields.size() != names.size()) {
            throw std::runtime_error("result row has " + std::to_string(fields.size()) + " fields, header has " +
                                     std::to_string(names.size()));
        }
        rows.push_back(std::move(fields));
    }
    std::vector<std::size_t> value_cols;
    std::vector<std::size_t> flag_cols;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].rfind("value_", 0) == 0) {
            value_cols.push_back(i);
        } else if (names[i].rfind("converged_", 0) == 0) {
            flag_cols.push_back(i);
        }
    }
    ParsedResult out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(value_cols.size()));
    out.converged.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(flag_cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < value_cols.size(); ++c) {
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                std::strtod(rows[r][value_cols[c]].c_str(), nullptr);
        }
        for (std::size_t c = 0; c < flag_cols.size(); ++c) {
            out.converged(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][flag_cols[c]] == "1";
        }
    }
    return out;
}

int cmd_integrate(const IntegrateOptions& options, std::ostream& out, std::ostream& err) {
    try {
        JobConfig cfg = load_config(options.config);
        const IntegrandTable table = load_integrand(cfg.integrand_path, cfg.log_x, cfg.log_y);
        validate_rows(cfg, table);
        const int threads = resolve_threads(options.threads, cfg.threads);
        Session session(cfg.type, table, cfg.settings);
        session.set_threads(threads);
        const BatchResult result = session.integrate_batch(cfg.request);
        const auto out_path = options.out ? options.out : cfg.output_path;
        Sink sink(out_path, out);
        write_result(sink.get(), cfg, result, threads);
        if (!result.all_converged()) {
            const auto rows = result.nonconverged_rows();
            err << "warning: " << rows.size() << " of " << cfg.request.size() << " rows did not converge: rows";
            for (std::size_t i = 0; i < rows.size(); ++i) {
                err << (i == 0 ? " " : ", ") << rows[i] + 1;
            }
            err << '\n';
            return kExitNotConverged;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

int cmd_selftest(const SelftestOptions& options, std::ostream& out, std::ostream& err) {
    std::optional<testing::ScopedAMatrixFault> fault;
    if (options.inject_fault == "a-sign") {
        fault.emplace();
        out << "fault injected: sign of the frequency terms of A flipped\n";
    } else if (!options.inject_fault.empty()) {
        err << "error: unknown fault '" << options.inject_fault << "', expected a-sign\n";
        return kExitUsage;
    }
    selftest::Options opts;
    opts.quick = options.quick;
    const auto checks = selftest::run_all(opts);
    return selftest::print_report(out, checks) ? kExitOk : kExitUsage;
}

int cmd_bench(const BenchOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const Problem p = make_problem(options.problem, options.points);
        const int threads = resolve_threads(options.threads, std::nullopt);
        Sink sink(options.out, out);
        std::ostream& os = sink.get();
        os << "# levin-cli " << LEVIN_VERSION << " bench " << p.name << ": " << p.description << '\n';
        write_settings(os, p.settings);
        os << "# oracle: Gauss-Kronrod 15, max_subintervals=" << OracleSettings{}.max_subintervals << '\n';
        os << "# levin_cold_s builds the bisection tree; levin_warm_s reuses it after an integrand update\n";
        os << "# speedup = oracle_s / levin_warm_s\n";
        os << "# columns: k levin converged oracle oracle_converged rel_diff";
        if (p.closed_form) {
            os << " closed closed_rel_err";
        }
        os << " levin_cold_s levin_warm_s oracle_s speedup\n";

        Session session(p.type, p.table, p.settings);
        session.set_threads(threads);
        std::vector<double> cold(p.k.size());
        std::vector<double> warm(p.k.size());
        std::vector<double> values(p.k.size());
        std::vector<bool> converged(p.k.size());
        for (std::size_t i = 0; i < p.k.size(); ++i) {
            const auto t0 = Clock::now();
            const BatchResult r = session.integrate_batch(p.request({p.k[i]}));
            cold[i] = seconds_since(t0);
            values[i] = r.values(0, 0);
            converged[i] = r.converged(0, 0);
        }
        session.update_integrand(p.table.values());
        for (std::size_t i = 0; i < p.k.size(); ++i) {
            const auto t0 = Clock::now();
            session.integrate_batch(p.request({p.k[i]}));
            warm[i] = seconds_since(t0);
        }
        std::size_t nonconverged = 0;
        for (std::size_t i = 0; i < p.k.size(); ++i) {
            const auto t0 = Clock::now();
            const OracleResult o = quad_reference(p.spec(p.k[i]), session.interpolant(), 0);
            const double t_oracle = seconds_since(t0);
            const double oracle = o.converged ? o.value : std::nan("");
            const double rel = std::abs(values[i] - oracle) / std::abs(oracle);
            os << g17(p.k[i]) << ' ' << g17(values[i]) << ' ' << converged[i] << ' ' << g17(oracle) << ' '
               << o.converged << ' ' << g17(rel);
            if (p.closed_form) {
                const double exact = p.closed_form(p.k[i]);
                os << ' ' << g17(exact) << ' ' << g17(std::abs(values[i] - exact) / std::abs(exact));
            }
            os << ' ' << g17(cold[i]) << ' ' << g17(warm[i]) << ' ' << g17(t_oracle) << ' '
               << g17(t_oracle / warm[i]) << '\n';
            nonconverged += converged[i] ? 0 : 1;
        }
        if (nonconverged > 0) {
            err << "warning: " << nonconverged << " of " << p.k.size() << " Levin integrals did not converge\n";
            return kExitNotConverged;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace levin::cli
