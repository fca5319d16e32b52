// Acceptance run: one line per criterion, nonzero exit when any fails.

#include "gradhom/commands.hpp"
#include "gradhom/effective.hpp"
#include "gradhom/macro1d.hpp"
#include "gradhom/unfolding.hpp"

#include "oracle.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace gradhom;

namespace {

const fs::path kData = fs::path(GRADHOM_SOURCE_DIR) / "data";

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string &what) {
        if (!ok) {
            pass = false;
            detail << " FAILED:" << what;
        }
    }
};

struct Criterion {
    int id;
    std::string title;
    double budget_s;
    std::function<void(Outcome &)> run;
};

CoefficientField cell(const std::string &name) { return build_cell_file(kData / "cells" / (name + ".json")); }

Material iso(double k, double eta, int d) { return make_material(make_identity_K(k, d), make_diagonal_A(eta, d)); }

double rel_diff(std::span<const double> a, std::span<const double> b) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

double step(double y) { return y < 0.0 ? 1.0 : 4.0; }

double K_eff_1d(const CoefficientField &f) { return assemble_K_eff(f, solve_all_hs1(f, SolverParams{}))(0, 0, 0, 0); }

void constant_identities(Outcome &o) {
    double worst = 0.0, corr = 0.0;
    for (int d = 1; d <= 3; ++d) {
        const int N = d == 3 ? 16 : 32;
        const auto m = make_material(make_isotropic_K(1.0, 1.0, d) + make_identity_K(0.5, d), make_diagonal_A(0.3, d));
        const auto f = constant_field(CellGrid(d, N), m);
        SolverParams p;
        p.threads = 4;
        const auto c1 = solve_all_hs1(f, p);
        const auto c2 = solve_all_hs2(f, p);
        for (const auto &phi : c1.phi)
            corr = std::max(corr, phi.l2_norm());
        for (const auto &w : c2.w)
            corr = std::max(corr, w.l2_norm());
        worst = std::max(worst, rel_diff(assemble_K_eff(f, c1).data(), m.K.data()));
        worst = std::max(worst, rel_diff(assemble_A_eff(f, c2).data(), m.A.data()));
    }
    o.detail << "max relative defect " << worst << ", max corrector norm " << corr;
    o.require(worst <= 1e-10, "defect");
    o.require(corr == 0.0, "correctors");
}

void laminate_hs1(Outcome &o) {
    const double k = K_eff_1d(cell("laminate1d_soft"));
    const double ref = oracle::fd_cell_hs1_1d(step, [](double) { return 1e-8; }, 1024);
    o.detail << "K_eff " << k << ", FD oracle " << ref;
    o.require(std::abs(k - 1.6) <= 0.016, "harmonic mean");
    o.require(std::abs(k - ref) <= 1e-4 * ref, "oracle");
}

void laminate_hs2(Outcome &o) {
    const auto f = laminate(CellGrid(1, 256), 0, 0.5, iso(1.0, 1.0, 1), iso(1.0, 4.0, 1));
    const double a = assemble_A_eff(f, solve_all_hs2(f, SolverParams{}))(0, 0, 0, 0, 0, 0);
    const double ref = oracle::fd_cell_hs2_1d(step, 2048);
    o.detail << "A_eff " << a << ", FD oracle " << ref;
    o.require(std::abs(a - 1.6) <= 0.016, "harmonic mean");
    o.require(std::abs(a - ref) <= 1e-4 * ref, "oracle");
}

void penalization(Outcome &o) {
    const auto lam = [](double eta) { return laminate(CellGrid(1, 256), 0, 0.5, iso(1.0, eta, 1), iso(4.0, eta, 1)); };
    const double soft = K_eff_1d(lam(1e-8)), stiff = K_eff_1d(lam(10.0));
    o.detail << "K_eff(1e-8) " << soft << ", K_eff(10) " << stiff;
    o.require(stiff - soft >= -1e-10, "monotone in eta");
    o.require(soft - 1.6 >= -1e-10, "harmonic lower bound");
    o.require(2.5 - stiff >= -1e-10, "arithmetic upper bound");
}

void structure(Outcome &o) {
    const auto f = cell("chiral_inclusion2d");
    SolverParams p;
    p.threads = 4;
    EffectiveTensors eff;
    eff.K_eff = assemble_K_eff(f, solve_all_hs1(f, p));
    eff.A_eff = assemble_A_eff(f, solve_all_hs2(f, p));
    eff.K_mean = assemble_K_mean(f);
    eff.A_mean = assemble_A_mean(f);
    const auto d = verify_effective(eff, f, 200, 1);
    o.detail << "symmetry defects " << d.sym_defect_K << ", " << d.sym_defect_A << "; Voigt margins "
             << d.voigt_margin_K << ", " << d.voigt_margin_A;
    o.require(d.sym_defect_K <= 1e-8 && d.sym_defect_A <= 1e-8, "symmetry");
    o.require(d.voigt_margin_K >= -1e-10 && d.voigt_margin_A >= -1e-10, "Voigt");
}

void unfolding(Outcome &o) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    bool exact = true;
    for (int d = 1; d <= 2; ++d)
        for (double eps : {0.25, 0.125, 0.0625}) {
            const auto g = MacroGrid::from_spacing(d, eps / 8, eps);
            std::vector<double> phi(g.num_fine()), psi(g.num_fine());
            for (size_t i = 0; i < phi.size(); ++i) {
                phi[i] = u(rng);
                psi[i] = u(rng);
            }
            const auto id = integral_identity_check(phi, g);
            worst = std::max(worst, id.defect / id.l1_norm);
            exact = exact && product_and_norm_checks(phi, psi, g).product_exact;
        }
    const auto rows = two_scale_convergence_probe([](const Point &x) { return x[0]; },
                                                  [](const Point &y) { return std::sin(2 * M_PI * y[0]); },
                                                  {0.25, 0.125, 0.0625}, 1, 16);
    o.detail << "identity defect/|phi|_1 " << worst << ", probe errors";
    for (const auto &r : rows)
        o.detail << " " << r.error;
    o.require(worst <= 1e-13, "integral identity");
    o.require(exact, "product rule");
    o.require(strictly_decreasing(rows), "two-scale probe");
}

void convergence(Outcome &o, const std::string &name, Regime regime, double ratio_limit) {
    const auto t = convergence_study(cell(name), regime, {0.125, 0.0625, 0.03125}, parse_load("const:1"));
    o.detail << "L2 errors";
    bool dec = true;
    for (size_t i = 0; i < t.rows.size(); ++i) {
        o.detail << " " << t.rows[i].l2_error;
        if (i > 0)
            dec = dec && t.rows[i].l2_error < t.rows[i - 1].l2_error;
    }
    const double ratio = t.rows.back().l2_error / t.rows.front().l2_error;
    o.detail << ", last/first " << ratio;
    o.require(dec, "strictly decreasing");
    o.require(ratio <= ratio_limit, "final ratio");
}

void s_independence(Outcome &o) {
    const std::vector<double> eps{0.125, 0.0625, 0.03125};
    const auto one = parse_load("const:1");
    auto check = [&](const std::string &tag, const CoefficientField &base, Regime regime) {
        auto chiral = base;
        chiral.set_S(chiral_S(base.grid(), tensor_maxima(base).calK, 1.0));
        const auto rows = s_independence_probe(base, chiral, regime, eps, one, {}, 3);
        o.detail << tag;
        bool dec = true;
        for (size_t i = 0; i < rows.size(); ++i) {
            o.detail << " " << rows[i].l2_difference;
            if (i > 0)
                dec = dec && rows[i].l2_difference < rows[i - 1].l2_difference;
        }
        o.require(dec, tag);
    };
    check("HS1", cell("laminate1d"), Regime::HS1);
    check("; HS2", cell("laminate1d_hs2"), Regime::HS2);
}

void coercivity(Outcome &o) {
    const std::vector<std::pair<std::string, Regime>> shipped{{"laminate1d", Regime::HS1},
                                                             {"laminate1d_soft", Regime::HS1},
                                                             {"chiral1d", Regime::HS1},
                                                             {"laminate1d_hs2", Regime::HS2}};
    double c_min = 1e300;
    for (const auto &[name, regime] : shipped) {
        const auto f = cell(name);
        for (double eps : {0.125, 0.0625, 0.03125})
            c_min = std::min(c_min, coercivity_probe(f, eps, regime).c_est);
    }
    o.detail << "min probe constant " << c_min;
    o.require(c_min > 0.0, "shipped examples");

    double worst_ratio = 0.0;
    for (const auto &[name, regime] : shipped) {
        double lo = 1e300, hi = 0.0;
        for (double eps : {0.125, 0.0625, 0.03125}) {
            const double c = stability_constant(cell(name), eps, regime, 5, 1);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        worst_ratio = std::max(worst_ratio, hi / lo);
    }
    o.detail << ", stability max/min " << worst_ratio;
    o.require(worst_ratio <= 2.0, "stability");

    auto strong = constant_field(CellGrid(1, 64), iso(1.0, 1.0, 1));
    strong.set_S(chiral_S(strong.grid(), 10.0, 1.0));
    const auto coarse = coercivity_probe(strong, 0.5, Regime::HS1);
    const auto fine = coercivity_probe(strong, 1.0 / 64, Regime::HS1);
    o.detail << ", large S: c(1/2) " << coarse.c_est << ", c(1/64) " << fine.c_est;
    o.require(!coarse.passes, "large S at eps=1/2");
    o.require(fine.passes, "large S at eps=1/64");
}

void determinism(Outcome &o) {
    const auto root = fs::temp_directory_path() / "gradhom_acceptance";
    fs::remove_all(root);
    const auto cfg = kData / "pipeline" / "laminate1d_hs1.json";
    std::string first;
    for (const char *run : {"a", "b"}) {
        GlobalOptions opt;
        opt.out_dir = root / run;
        const auto manifest = read_text(cmd_pipeline(cfg, opt));
        if (first.empty())
            first = manifest;
        else
            o.require(manifest == first, "manifests differ");
    }
    o.detail << "manifest sha256 " << sha256_hex(first).substr(0, 16);
}

} // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    const std::vector<Criterion> criteria{
        {1, "constant-coefficient identities, d = 1, 2, 3", 60, constant_identities},
        {2, "1D laminate HS1, eta -> 0: K_eff = 1.6", 5, laminate_hs1},
        {3, "1D laminate HS2: A_eff = 1.6", 5, laminate_hs2},
        {4, "gradient-penalization monotonicity", 10, penalization},
        {5, "effective-tensor structure, 2D chiral inclusion N = 64", 120, structure},
        {6, "unfolding exactness and two-scale probe", 5, unfolding},
        {7, "epsilon-convergence HS1", 30,
         [](Outcome &o) { convergence(o, "laminate1d", Regime::HS1, 0.25); }},
        {8, "epsilon-convergence HS2", 30,
         [](Outcome &o) { convergence(o, "laminate1d_hs2", Regime::HS2, 0.5); }},
        {9, "S-independence of the limit", 60, s_independence},
        {10, "coercivity and a-priori stability", 30, coercivity},
        {11, "pipeline determinism", 10, determinism},
    };

    int failed = 0;
    for (const auto &c : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail << " exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) {
            o.pass = false;
            o.detail << " FAILED:time budget " << c.budget_s << " s";
        }
        failed += o.pass ? 0 : 1;
        std::printf("[%s] %02d %s (%.2f s) %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title.c_str(), secs,
                    o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
