// gradhom: periodic homogenization of second-gradient materials from the command line.

#include "gradhom/commands.hpp"
#include "gradhom/errors.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

using namespace gradhom;

namespace {

Regime regime_arg(const std::string &s) {
    const Regime r = parse_regime(s);
    if (r == Regime::Other)
        throw ConfigError("--regime must be hs1 or hs2");
    return r;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Periodic homogenization of strain-gradient materials"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    GlobalOptions opt;
    std::string log_level = "info";
    app.add_option("--seed", opt.seed, "Seed for sampled checks")->capture_default_str();
    app.add_option("--threads", opt.threads, "Worker threads for independent solves")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--out-dir", opt.out_dir, "Directory for relative output paths")->capture_default_str();
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")->capture_default_str();

    std::string cell, spec, out, regime = "hs1", correctors, table, load = "const:1", config;
    double eps = 0.0, p_prime = 2.0, q_prime = 2.0;
    std::vector<double> eps_list;
    std::vector<std::string> metrics;
    SolverParams solver;
    MeshParams mesh;
    int d = 1, n_y = 16;

    auto *make = app.add_subcommand("make-cell", "Build a coefficient field from a JSON cell spec");
    make->add_option("--spec", spec, "Cell spec (JSON)")->required()->check(CLI::ExistingFile);
    make->add_option("--out", out, "Field file")->required();

    auto *scale = app.add_subcommand("scale-report", "Intrinsic lengths and regime classification");
    scale->add_option("--cell", cell, "Field file")->required()->check(CLI::ExistingFile);
    scale->add_option("--epsilon,--eps", eps, "Period size epsilon")->required()->check(CLI::PositiveNumber);
    scale->add_option("--pprime", p_prime, "Hoelder exponent p'")->capture_default_str();
    scale->add_option("--qprime", q_prime, "Hoelder exponent q'")->capture_default_str();
    scale->add_option("--out", out, "Report (JSON)")->required();

    auto *solve = app.add_subcommand("solve-cell", "Solve all cell correctors of a regime");
    solve->add_option("--cell", cell, "Field file")->required()->check(CLI::ExistingFile);
    solve->add_option("--regime", regime, "hs1 or hs2")->required();
    solve->add_option("--tol", solver.rel_tol, "Relative residual target")->capture_default_str();
    solve->add_option("--max-iter", solver.max_iter, "CG iteration cap")->capture_default_str();
    solve->add_option("--out", out, "Corrector file")->required();

    auto *effective = app.add_subcommand("effective", "Assemble and check effective tensors");
    effective->add_option("--cell", cell, "Field file")->required()->check(CLI::ExistingFile);
    effective->add_option("--correctors", correctors, "Corrector file")->required()->check(CLI::ExistingFile);
    effective->add_option("--regime", regime, "hs1 or hs2")->required();
    effective->add_option("--out", out, "Tensors and diagnostics (JSON)")->required();

    auto *converge = app.add_subcommand("converge", "Fine versus homogenized 1D solutions over epsilon");
    converge->add_option("--cell", cell, "1D field file")->required()->check(CLI::ExistingFile);
    converge->add_option("--regime", regime, "hs1 or hs2")->required();
    converge->add_option("--eps", eps_list, "Comma-separated epsilons")->required()->delimiter(',');
    converge->add_option("--g", load, "Load: const:c, sin:k or lin:c")->capture_default_str();
    converge->add_option("--elements-per-period", mesh.elements_per_period, "Fine mesh resolution")
        ->capture_default_str();
    converge->add_option("--homog-elements", mesh.homog_elements, "Homogenized mesh size")->capture_default_str();
    converge->add_option("--out", out, "Table (CSV)")->required();

    auto *unfold = app.add_subcommand("unfold-check", "Unfolding identities and convergence probes");
    unfold->add_option("--d", d, "Dimension")->check(CLI::Range(1, 3))->capture_default_str();
    unfold->add_option("--eps", eps_list, "Comma-separated epsilons")->required()->delimiter(',');
    unfold->add_option("--n-y", n_y, "Fine nodes per cell and axis")->capture_default_str();
    unfold->add_option("--out", out, "Report (JSON)")->required();

    auto *pipeline = app.add_subcommand("pipeline", "Run all stages from a JSON config");
    pipeline->add_option("--config", config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);

    auto *plot = app.add_subcommand("export-plotdata", "Convert a convergence table to long format");
    plot->add_option("--table", table, "Table (CSV)")->required()->check(CLI::ExistingFile);
    plot->add_option("--metrics", metrics, "Columns to export (default: all)")->delimiter(',');
    plot->add_option("--out", out, "Long-format CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const auto level = spdlog::level::from_str(log_level);
        if (level == spdlog::level::off && log_level != "off")
            throw ConfigError("unknown --log-level '" + log_level + "'");
        spdlog::set_level(level);

        if (*make)
            cmd_make_cell(spec, out, opt);
        else if (*scale)
            cmd_scale_report(cell, eps, p_prime, q_prime, out, opt);
        else if (*solve)
            cmd_solve_cell(cell, regime_arg(regime), solver, out, opt);
        else if (*effective)
            cmd_effective(cell, correctors, regime_arg(regime), out, opt);
        else if (*converge)
            cmd_converge(cell, regime_arg(regime), ConvergeOptions{eps_list, load, mesh, solver}, out, opt);
        else if (*unfold)
            cmd_unfold_check(d, eps_list, n_y, out, opt);
        else if (*pipeline)
            cmd_pipeline(config, opt);
        else if (*plot)
            cmd_export_plotdata(table, metrics, out, opt);
    } catch (const std::exception &e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e);
    }
    return EXIT_SUCCESS;
}
