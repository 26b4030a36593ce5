#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

#ifndef LEVIN_VERSION
#define LEVIN_VERSION "unknown"
#endif

int main(int argc, char** argv) {
    using namespace levin::cli;

    CLI::App app{"Levin collocation integrals of tabulated functions times Bessel products", "levin-cli"};
    app.set_version_flag("--version", LEVIN_VERSION);
    app.require_subcommand(1);

    IntegrateOptions integrate;
    std::string out_path;
    int threads = 0;
    auto* integrate_cmd = app.add_subcommand("integrate", "Run the batch described by a config file");
    integrate_cmd->add_option("--config", integrate.config, "key = value config file")->required();
    integrate_cmd->add_option("--threads", threads, "worker threads (overrides LEVIN_THREADS)");
    integrate_cmd->add_option("--out", out_path, "output table (default: config 'output' or stdout)");

    SelftestOptions selftest;
    auto* selftest_cmd = app.add_subcommand("selftest", "Run the closed-form, oracle and invariant checks");
    selftest_cmd->add_flag("--quick", selftest.quick, "smaller sample sizes");
    selftest_cmd->add_option("--inject-fault", selftest.inject_fault, "mutation hook (a-sign)");

    BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench", "Compare Levin against the reference quadrature");
    bench_cmd->add_option("--problem", bench.problem, "eq4, eq6, eq7 or eq8")->required();
    bench_cmd->add_option("--out", out_path, "output table (default stdout)");
    bench_cmd->add_option("--points", bench.points, "number of k values (default per problem)");
    bench_cmd->add_option("--threads", threads, "worker threads (overrides LEVIN_THREADS)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (*integrate_cmd) {
        if (integrate_cmd->count("--threads") > 0) {
            integrate.threads = threads;
        }
        if (!out_path.empty()) {
            integrate.out = out_path;
        }
        return cmd_integrate(integrate, std::cout, std::cerr);
    }
    if (*selftest_cmd) {
        return cmd_selftest(selftest, std::cout, std::cerr);
    }
    if (bench_cmd->count("--threads") > 0) {
        bench.threads = threads;
    }
    if (!out_path.empty()) {
        bench.out = out_path;
    }
    return cmd_bench(bench, std::cout, std::cerr);
}
