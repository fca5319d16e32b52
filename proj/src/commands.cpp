#include "gradhom/commands.hpp"

#include "gradhom/effective.hpp"
#include "gradhom/errors.hpp"
#include "gradhom/unfolding.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

namespace gradhom {

fs::path GlobalOptions::output(const fs::path &p) const { return p.is_absolute() ? p : out_dir / p; }

int exit_code_for(const std::exception &e) {
    if (dynamic_cast<const ConfigError *>(&e))
        return 2;
    if (dynamic_cast<const SolverError *>(&e))
        return 3;
    if (dynamic_cast<const CoercivityError *>(&e))
        return 4;
    return 1;
}

// ---- cells ---------------------------------------------------------------------------------

Material parse_material(ConfigReader cfg, int d) {
    auto kc = cfg.object("K");
    Tensor4 K(d);
    bool any = false;
    if (kc.has("lambda") || kc.has("mu")) {
        K += make_isotropic_K(kc.number("lambda"), kc.number("mu"), d);
        any = true;
    }
    if (kc.has("identity")) {
        K += make_identity_K(kc.number("identity"), d);
        any = true;
    }
    if (!any)
        kc.fail("K", "needs lambda/mu and/or identity");
    kc.finish();
    auto ac = cfg.object("A");
    Tensor6 A = make_diagonal_A(ac.number("eta"), d);
    ac.finish();
    cfg.finish();
    K.flag_major_symmetric();
    Material m = make_material(std::move(K), std::move(A));
    try {
        m.validate();
    } catch (const InvalidMaterial &e) {
        cfg.fail("K", e.what());
    }
    return m;
}

CoefficientField build_cell(ConfigReader cfg) {
    const int d = cfg.integer("d");
    const int N = cfg.integer("N");
    CellGrid grid;
    try {
        grid = CellGrid(d, N);
    } catch (const Error &e) {
        cfg.fail("N", e.what());
    }
    std::vector<Material> phases;
    for (auto &p : cfg.objects("phases"))
        phases.push_back(parse_material(p, d));
    auto geo = cfg.object("geometry");
    const std::string kind = geo.string("kind");
    auto need_phases = [&](size_t n) {
        if (phases.size() != n)
            cfg.fail("phases", "geometry '" + kind + "' needs " + std::to_string(n) + " phases");
    };
    CoefficientField field;
    try {
        if (kind == "constant") {
            need_phases(1);
            field = constant_field(grid, phases[0]);
        } else if (kind == "laminate") {
            need_phases(2);
            field = laminate(grid, geo.integer("axis", 0), geo.number("fraction"), phases[0], phases[1]);
        } else if (kind == "inclusion") {
            need_phases(2);
            InclusionSpec inc;
            const std::string shape = geo.string("shape");
            if (shape == "ball") {
                inc.shape = InclusionShape::Ball;
                inc.radius = geo.number("radius");
            } else if (shape == "box") {
                inc.shape = InclusionShape::Box;
                inc.half_widths = geo.numbers("half_widths");
            } else if (shape == "slab") {
                inc.shape = InclusionShape::LaminateSlab;
                inc.radius = geo.number("half_width");
                inc.slab_axis = geo.integer("axis", 0);
            } else {
                geo.fail("shape", "expected ball, box or slab");
            }
            inc.center = geo.has("center") ? geo.numbers("center") : std::vector<double>(static_cast<size_t>(d), 0.0);
            inc.smoothing_width = geo.number("smoothing_width", 0.0);
            field = two_phase(grid, inc, phases[0], phases[1]);
        } else {
            geo.fail("kind", "expected constant, laminate or inclusion");
        }
    } catch (const ConfigError &) {
        throw;
    } catch (const Error &e) {
        geo.fail("kind", e.what());
    }
    geo.finish();
    if (cfg.has("chiral")) {
        auto ch = cfg.object("chiral");
        try {
            field.set_S(chiral_S(grid, ch.number("amplitude"), ch.number("pitch", 1.0)));
        } catch (const ConfigError &) {
            throw;
        } catch (const Error &e) {
            ch.fail("pitch", e.what());
        }
        ch.finish();
    }
    cfg.finish();
    return field;
}

CoefficientField build_cell_file(const fs::path &spec) { return build_cell(ConfigReader::from_file(spec)); }

namespace {

void ensure_parent(const fs::path &p) {
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
}

std::string dump(const json &j) { return j.dump(2) + "\n"; }

} // namespace

void cmd_make_cell(const fs::path &spec, const fs::path &out, const GlobalOptions &opt) {
    const auto field = build_cell_file(spec);
    const auto path = opt.output(out);
    ensure_parent(path);
    write_field(path, field);
    spdlog::info("wrote {} (d={}, N={})", path.string(), field.dim(), field.grid().n());
}

// ---- scaling and cell solves ---------------------------------------------------------------

json scale_report_json(const ScalingReport &r) {
    return json{{"calK", r.calK},       {"calS", r.calS},       {"calA", r.calA},
                {"ell_SG", r.ell_SG},   {"ell_chiral", r.ell_chiral}, {"p_prime", r.p_prime},
                {"q_prime", r.q_prime}, {"epsilon", r.epsilon}, {"regime", to_string(r.regime)}};
}

void cmd_scale_report(const fs::path &cell, double eps, double p_prime, double q_prime, const fs::path &out,
                      const GlobalOptions &opt) {
    const auto field = read_field(cell);
    const auto r = scale_report(field, eps, p_prime, q_prime);
    const auto path = opt.output(out);
    ensure_parent(path);
    write_text(path, dump(scale_report_json(r)));
    spdlog::info("regime {} (ell_SG={:.4g}, ell_chiral={:.4g}, eps={})", to_string(r.regime), r.ell_SG,
                 r.ell_chiral, eps);
}

namespace {

CorrectorSet solve_cell(const CoefficientField &field, Regime regime, const SolverParams &params) {
    if (regime == Regime::HS1)
        return solve_all_hs1(field, params);
    if (regime == Regime::HS2)
        return solve_all_hs2(field, params);
    throw UnsupportedRegime("cell problems exist for hs1 and hs2 only");
}

double corrector_residual(const CoefficientField &field, const CorrectorSet &c) {
    return std::visit([&](const auto &x) { return residual(field, x); }, c);
}

EffectiveTensors effective_from(const CoefficientField &field, const CorrectorSet &corr, Regime regime,
                                std::uint64_t seed) {
    EffectiveTensors eff;
    eff.K_mean = assemble_K_mean(field);
    eff.A_mean = assemble_A_mean(field);
    if (regime == Regime::HS1) {
        const auto *c = std::get_if<CorrectorHS1>(&corr);
        if (!c)
            throw ConfigError("correctors were solved for hs2, effective asked for hs1");
        eff.K_eff = assemble_K_eff(field, *c);
    } else if (regime == Regime::HS2) {
        const auto *c = std::get_if<CorrectorHS2>(&corr);
        if (!c)
            throw ConfigError("correctors were solved for hs1, effective asked for hs2");
        eff.A_eff = assemble_A_eff(field, *c);
    } else {
        throw UnsupportedRegime("effective tensors exist for hs1 and hs2 only");
    }
    verify_effective(eff, field, 200, seed);
    return eff;
}

} // namespace

void cmd_solve_cell(const fs::path &cell, Regime regime, SolverParams params, const fs::path &out,
                    const GlobalOptions &opt) {
    const auto field = read_field(cell);
    params.threads = opt.threads;
    const auto corr = solve_cell(field, regime, params);
    const auto path = opt.output(out);
    ensure_parent(path);
    write_correctors(path, corr);
    spdlog::info("wrote {} (max residual {:.3e})", path.string(), corrector_residual(field, corr));
}

json effective_json(Regime regime, const EffectiveTensors &eff) {
    const auto &d = eff.diagnostics;
    json diag{{"field_c1", d.field_c1}, {"field_kappa1", d.field_kappa1}, {"samples", d.samples}};
    json j{{"regime", to_string(regime)}, {"K_mean", to_json(eff.K_mean)}, {"A_mean", to_json(eff.A_mean)}};
    if (eff.K_eff) {
        j["K_eff"] = to_json(*eff.K_eff);
        diag["sym_defect_K"] = d.sym_defect_K;
        diag["min_eig_K"] = d.min_eig_K;
        diag["voigt_margin_K"] = d.voigt_margin_K;
    }
    if (eff.A_eff) {
        j["A_eff"] = to_json(*eff.A_eff);
        diag["sym_defect_A"] = d.sym_defect_A;
        diag["min_eig_A"] = d.min_eig_A;
        diag["voigt_margin_A"] = d.voigt_margin_A;
    }
    j["diagnostics"] = diag;
    return j;
}

void cmd_effective(const fs::path &cell, const fs::path &correctors, Regime regime, const fs::path &out,
                   const GlobalOptions &opt) {
    const auto field = read_field(cell);
    const auto corr = read_correctors(correctors);
    const auto eff = effective_from(field, corr, regime, opt.seed);
    const auto path = opt.output(out);
    ensure_parent(path);
    write_text(path, dump(effective_json(regime, eff)));
    spdlog::info("wrote {}", path.string());
}

// ---- macro ---------------------------------------------------------------------------------

Table convergence_table(const ConvergenceTable &t) {
    Table out;
    out.header = {"epsilon", "l2_error", "h1_error", "energy_fine", "energy_homog", "stability_const"};
    for (const auto &r : t.rows)
        out.rows.push_back({r.epsilon, r.l2_error, r.h1_error, r.energy_fine, r.energy_homog, r.stability_const});
    return out;
}

void cmd_converge(const fs::path &cell, Regime regime, const ConvergeOptions &c, const fs::path &out,
                  const GlobalOptions &opt) {
    const auto field = read_field(cell);
    auto solver = c.solver;
    solver.threads = opt.threads;
    const auto table = convergence_study(field, regime, c.eps, parse_load(c.load), solver, c.mesh, opt.seed);
    const auto path = opt.output(out);
    ensure_parent(path);
    write_csv(path, convergence_table(table));
    for (const auto &r : table.rows)
        spdlog::info("eps={} l2={:.4e} h1={:.4e}", r.epsilon, r.l2_error, r.h1_error);
}

json unfold_check_report(int d, const std::vector<double> &eps, int n_y, std::uint64_t seed) {
    json rows = json::array();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (double e : eps) {
        const auto grid = MacroGrid::from_spacing(d, e / n_y, e);
        std::vector<double> phi(grid.num_fine()), psi(grid.num_fine());
        for (auto &v : phi)
            v = uni(rng);
        for (auto &v : psi)
            v = uni(rng);
        const auto id = integral_identity_check(phi, grid);
        const auto pn = product_and_norm_checks(phi, psi, grid);
        rows.push_back({{"epsilon", e},
                        {"cells", grid.num_cells()},
                        {"lambda_nodes", decompose_domain(grid).lambda.size()},
                        {"integral_lhs", id.lhs},
                        {"integral_rhs", id.rhs},
                        {"integral_defect", id.defect},
                        {"l1_norm", id.l1_norm},
                        {"product_defect", pn.product_defect},
                        {"unfolded_norm", pn.unfolded_norm},
                        {"source_norm", pn.source_norm},
                        {"norm_bounded", pn.norm_bounded}});
    }
    auto sine = [d](const Point &y) {
        double s = 1.0;
        for (int k = 0; k < d; ++k)
            s *= std::sin(2.0 * std::numbers::pi * y[k]);
        return s;
    };
    auto ramp = [](const Point &x) { return x[0]; };
    const auto ts = two_scale_convergence_probe(ramp, sine, eps, d, n_y);
    const auto hs = hessian_compatibility_probe(
        [](const Point &x) { return 1.0 + x[0]; }, sine, eps, d, n_y);
    auto probe_json = [](const std::vector<ProbeRow> &p) {
        json a = json::array();
        for (const auto &r : p)
            a.push_back({{"epsilon", r.eps}, {"error", r.error}});
        return a;
    };
    return json{{"d", d},
                {"n_y", n_y},
                {"seed", seed},
                {"identities", rows},
                {"two_scale", probe_json(ts)},
                {"two_scale_decreasing", strictly_decreasing(ts)},
                {"hessian", probe_json(hs)},
                {"hessian_decreasing", strictly_decreasing(hs)}};
}

void cmd_unfold_check(int d, const std::vector<double> &eps, int n_y, const fs::path &out,
                      const GlobalOptions &opt) {
    const auto report = unfold_check_report(d, eps, n_y, opt.seed);
    const auto path = opt.output(out);
    ensure_parent(path);
    write_text(path, dump(report));
    spdlog::info("wrote {}", path.string());
}

// ---- pipeline ------------------------------------------------------------------------------

fs::path cmd_pipeline(const fs::path &config, const GlobalOptions &opt_in) {
    using clock = std::chrono::steady_clock;
    const std::string config_text = read_text(config);
    auto cfg = ConfigReader::from_text(config_text, config.string());

    GlobalOptions opt = opt_in;
    if (cfg.has("seed"))
        opt.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
    const Regime regime = [&] {
        try {
            return parse_regime(cfg.string("regime"));
        } catch (const ConfigError &e) {
            cfg.fail("regime", e.what());
        }
    }();
    if (regime == Regime::Other)
        cfg.fail("regime", "pipeline needs hs1 or hs2");
    const double eps = cfg.number("epsilon");
    const double p_prime = cfg.number("p_prime", 2.0);
    const double q_prime = cfg.number("q_prime", 2.0);

    SolverParams solver;
    solver.threads = opt.threads;
    if (cfg.has("solver")) {
        auto s = cfg.object("solver");
        solver.rel_tol = s.number("rel_tol", solver.rel_tol);
        solver.max_iter = s.integer("max_iter", solver.max_iter);
        s.finish();
    }
    std::optional<ConfigReader> inline_cell;
    fs::path cell_spec;
    if (cfg.has("cell")) {
        inline_cell = cfg.object("cell");
    } else {
        cell_spec = cfg.string("cell_spec");
        if (cell_spec.is_relative())
            cell_spec = config.parent_path() / cell_spec;
    }
    std::optional<ConvergeOptions> conv;
    if (cfg.has("converge")) {
        auto c = cfg.object("converge");
        ConvergeOptions co;
        co.eps = c.numbers("eps");
        co.load = c.string("load", co.load);
        co.mesh.elements_per_period = c.integer("elements_per_period", co.mesh.elements_per_period);
        co.mesh.homog_elements = c.integer("homog_elements", co.mesh.homog_elements);
        c.finish();
        co.solver = solver;
        conv = co;
    }
    cfg.finish();

    const CoefficientField field = inline_cell ? build_cell(*inline_cell) : build_cell_file(cell_spec);
    if (conv && field.dim() != 1)
        cfg.fail("converge", "convergence studies need a 1D cell");

    fs::create_directories(opt.out_dir);
    json timings = json::object();
    std::vector<std::string> stages;
    std::vector<std::string> outputs;
    auto stage = [&](const std::string &name, auto &&fn) {
        const auto t0 = clock::now();
        spdlog::info("stage {}", name);
        try {
            fn();
        } catch (const std::exception &e) {
            spdlog::error("stage {} failed: {}", name, e.what());
            throw;
        }
        timings[name] = std::chrono::duration<double>(clock::now() - t0).count();
        stages.push_back(name);
    };

    ScalingReport scale;
    stage("scale-report", [&] {
        scale = scale_report(field, eps, p_prime, q_prime);
        if (scale.regime != regime)
            spdlog::warn("configured regime {} but the tensor magnitudes classify as {}", to_string(regime),
                         to_string(scale.regime));
        write_text(opt.out_dir / "scale.json", dump(scale_report_json(scale)));
        outputs.push_back("scale.json");
    });
    stage("make-cell", [&] {
        write_field(opt.out_dir / "cell.field", field);
        outputs.push_back("cell.field");
    });
    CorrectorSet corr;
    json residuals = json::object();
    stage("solve-cell", [&] {
        corr = solve_cell(field, regime, solver);
        residuals["cell_max"] = corrector_residual(field, corr);
        json its = json::array();
        std::visit([&](const auto &c) {
            for (const auto &s : c.stats)
                its.push_back(s.iterations);
        }, corr);
        residuals["cell_iterations"] = its;
        write_correctors(opt.out_dir / "correctors.bin", corr);
        outputs.push_back("correctors.bin");
    });
    stage("effective", [&] {
        const auto eff = effective_from(field, corr, regime, opt.seed);
        write_text(opt.out_dir / "eff.json", dump(effective_json(regime, eff)));
        outputs.push_back("eff.json");
    });
    if (conv) {
        stage("converge", [&] {
            const auto table =
                convergence_study(field, regime, conv->eps, parse_load(conv->load), conv->solver, conv->mesh, opt.seed);
            residuals["macro_cell"] = table.effective.residual;
            write_csv(opt.out_dir / "table.csv", convergence_table(table));
            outputs.push_back("table.csv");
        });
    }

    json digests = json::object();
    for (const auto &name : outputs)
        digests[name] = file_sha256(opt.out_dir / name);
    const json manifest{{"tool", "gradhom"},
                        {"version", kToolVersion},
                        {"config_sha256", sha256_hex(config_text)},
                        {"seed", opt.seed},
                        {"rng", "mt19937_64"},
                        {"regime", to_string(regime)},
                        {"classified_regime", to_string(scale.regime)},
                        {"stages", stages},
                        {"residuals", residuals},
                        {"outputs", digests}};
    const auto manifest_path = opt.out_dir / "manifest.json";
    write_text(manifest_path, dump(manifest));
    write_text(opt.out_dir / "timings.json", dump(timings));
    spdlog::info("wrote {}", manifest_path.string());
    return manifest_path;
}

void cmd_export_plotdata(const fs::path &table, std::vector<std::string> metrics, const fs::path &out,
                         const GlobalOptions &opt) {
    const auto t = read_csv(table);
    if (metrics.empty())
        for (const auto &h : t.header)
            if (h != "epsilon")
                metrics.push_back(h);
    const auto path = opt.output(out);
    ensure_parent(path);
    write_long_csv(path, t, metrics);
    spdlog::info("wrote {} ({} rows)", path.string(), t.rows.size() * metrics.size());
}

} // namespace gradhom
