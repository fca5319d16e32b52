#pragma once

// The gradhom subcommands as library calls. Each writes its artifacts and returns nothing;
// failures surface as gradhom::Error subclasses.

#include "gradhom/effective.hpp"
#include "gradhom/io.hpp"
#include "gradhom/macro1d.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gradhom {

struct GlobalOptions {
    std::uint64_t seed = 1;
    int threads = 1;
    fs::path out_dir = ".";

    /// Relative paths land in out_dir.
    fs::path output(const fs::path &p) const;
};

constexpr const char *kToolVersion = "0.1.0";

/// Exit status for an exception escaping a command: 2 config, 3 solver, 4 coercivity, 1 other.
int exit_code_for(const std::exception &e);

Material parse_material(ConfigReader cfg, int d);
/// Cell spec: d, N, geometry {kind: constant | laminate | inclusion, ...}, phases, optional chiral.
CoefficientField build_cell(ConfigReader cfg);
CoefficientField build_cell_file(const fs::path &spec);

void cmd_make_cell(const fs::path &spec, const fs::path &out, const GlobalOptions &opt);
json scale_report_json(const ScalingReport &r);
void cmd_scale_report(const fs::path &cell, double eps, double p_prime, double q_prime, const fs::path &out,
                      const GlobalOptions &opt);
void cmd_solve_cell(const fs::path &cell, Regime regime, SolverParams params, const fs::path &out,
                    const GlobalOptions &opt);
json effective_json(Regime regime, const EffectiveTensors &eff);
void cmd_effective(const fs::path &cell, const fs::path &correctors, Regime regime, const fs::path &out,
                   const GlobalOptions &opt);

struct ConvergeOptions {
    std::vector<double> eps;
    std::string load = "const:1";
    MeshParams mesh;
    SolverParams solver;
};
Table convergence_table(const ConvergenceTable &t);
void cmd_converge(const fs::path &cell, Regime regime, const ConvergeOptions &c, const fs::path &out,
                  const GlobalOptions &opt);

json unfold_check_report(int d, const std::vector<double> &eps, int n_y, std::uint64_t seed);
void cmd_unfold_check(int d, const std::vector<double> &eps, int n_y, const fs::path &out,
                      const GlobalOptions &opt);

/// Runs scale-report, make-cell, solve-cell, effective and optionally converge from one JSON
/// config. Returns the manifest path.
fs::path cmd_pipeline(const fs::path &config, const GlobalOptions &opt);

void cmd_export_plotdata(const fs::path &table, std::vector<std::string> metrics, const fs::path &out,
                         const GlobalOptions &opt);

} // namespace gradhom
