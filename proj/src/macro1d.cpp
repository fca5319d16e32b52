#include "gradhom/macro1d.hpp"

#include "gradhom/effective.hpp"
#include "gradhom/errors.hpp"
#include "gradhom/parallel.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace gradhom {

namespace {

constexpr std::array<double, 4> kGaussT = {
    0.5 - 0.5 * 0.8611363115940526, 0.5 - 0.5 * 0.3399810435848563,
    0.5 + 0.5 * 0.3399810435848563, 0.5 + 0.5 * 0.8611363115940526};
constexpr std::array<double, 4> kGaussW = {0.5 * 0.3478548451374538, 0.5 * 0.6521451548625461,
                                           0.5 * 0.6521451548625461, 0.5 * 0.3478548451374538};

struct Basis {
    std::array<double, 4> v, d1, d2;
};

// Hermite cubics on an element of length h at local t, derivatives in x.
Basis hermite(double t, double h) {
    const double t2 = t * t, t3 = t2 * t;
    Basis b;
    b.v = {1.0 - 3.0 * t2 + 2.0 * t3, h * (t - 2.0 * t2 + t3), 3.0 * t2 - 2.0 * t3, h * (t3 - t2)};
    b.d1 = {(-6.0 * t + 6.0 * t2) / h, 1.0 - 4.0 * t + 3.0 * t2, (6.0 * t - 6.0 * t2) / h, 3.0 * t2 - 2.0 * t};
    b.d2 = {(-6.0 + 12.0 * t) / (h * h), (-4.0 + 6.0 * t) / h, (6.0 - 12.0 * t) / (h * h), (-2.0 + 6.0 * t) / h};
    return b;
}

// Reduced index of each global dof, -1 for the clamped values u(0), u(1).
std::vector<int> reduced_map(int elements) {
    const int ndof = 2 * (elements + 1);
    std::vector<int> map(static_cast<size_t>(ndof));
    int next = 0;
    for (int g = 0; g < ndof; ++g)
        map[g] = (g == 0 || g == 2 * elements) ? -1 : next++;
    return map;
}

template <typename ElementKernel>
Eigen::SparseMatrix<double> assemble_matrix(int elements, ElementKernel &&kernel) {
    const auto map = reduced_map(elements);
    const int n = 2 * elements;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(elements) * 16);
    const double h = 1.0 / elements;
    for (int e = 0; e < elements; ++e) {
        double Ke[4][4] = {};
        for (int q = 0; q < 4; ++q) {
            const double x = (e + kGaussT[q]) * h;
            const auto b = hermite(kGaussT[q], h);
            kernel(x, b, kGaussW[q] * h, Ke);
        }
        for (int i = 0; i < 4; ++i) {
            const int gi = map[2 * e + i];
            if (gi < 0)
                continue;
            for (int j = 0; j < 4; ++j) {
                const int gj = map[2 * e + j];
                if (gj >= 0)
                    trip.emplace_back(gi, gj, Ke[i][j]);
            }
        }
    }
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

std::vector<double> expand(const Eigen::VectorXd &red, int elements) {
    const auto map = reduced_map(elements);
    std::vector<double> full(map.size(), 0.0);
    for (size_t g = 0; g < map.size(); ++g)
        if (map[g] >= 0)
            full[g] = red(map[g]);
    return full;
}

size_t cell_node(const CoefficientField &field, double x, double eps) {
    const int N = field.grid().n();
    const double s = x / eps;
    const double frac = s - std::floor(s);
    int m = static_cast<int>(std::floor(frac * N));
    m = ((m % N) + N) % N;
    return static_cast<size_t>(m);
}

void require_1d(const CoefficientField &field) {
    if (field.dim() != 1)
        throw DimensionMismatch("macro problems need a 1D cell field, got d=" + std::to_string(field.dim()));
}

} // namespace

Solution1D::Solution1D(int elements, std::vector<double> dofs) : elements_(elements), dofs_(std::move(dofs)) {
    if (dofs_.size() != static_cast<size_t>(2 * (elements + 1)))
        throw DimensionMismatch("Hermite solution needs 2(elements+1) dofs");
}

std::pair<int, double> Solution1D::locate(double x) const {
    const double s = std::clamp(x, 0.0, 1.0) * elements_;
    int e = std::min(static_cast<int>(std::floor(s)), elements_ - 1);
    return {e, s - e};
}

double Solution1D::value(double x) const {
    const auto [e, t] = locate(x);
    const auto b = hermite(t, h());
    double v = 0.0;
    for (int i = 0; i < 4; ++i)
        v += b.v[i] * dofs_[2 * e + i];
    return v;
}

double Solution1D::d1(double x) const {
    const auto [e, t] = locate(x);
    const auto b = hermite(t, h());
    double v = 0.0;
    for (int i = 0; i < 4; ++i)
        v += b.d1[i] * dofs_[2 * e + i];
    return v;
}

double Solution1D::d2(double x) const {
    const auto [e, t] = locate(x);
    const auto b = hermite(t, h());
    double v = 0.0;
    for (int i = 0; i < 4; ++i)
        v += b.d2[i] * dofs_[2 * e + i];
    return v;
}

System1D assemble_1d(const Coefficients1D &c, const Fn1 *g, int elements) {
    if (elements < 1)
        throw GeometryError("need at least one element");
    System1D sys;
    sys.elements = elements;
    sys.B = assemble_matrix(elements, [&](double x, const Basis &b, double w, double (&Ke)[4][4]) {
        const double K = c.K(x), s = c.s ? c.s(x) : 0.0, a = c.a ? c.a(x) : 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                Ke[i][j] += w * (K * b.d1[j] * b.d1[i] + s * (b.d2[j] * b.d1[i] + b.d1[j] * b.d2[i]) +
                                 a * b.d2[j] * b.d2[i]);
    });
    const auto map = reduced_map(elements);
    for (size_t gdof = 0; gdof < map.size(); ++gdof)
        if (map[gdof] >= 0)
            sys.free_dofs.push_back(static_cast<int>(gdof));
    sys.F = Eigen::VectorXd::Zero(sys.B.rows());
    if (g) {
        const double h = 1.0 / elements;
        for (int e = 0; e < elements; ++e)
            for (int q = 0; q < 4; ++q) {
                const double x = (e + kGaussT[q]) * h;
                const auto b = hermite(kGaussT[q], h);
                const double gx = (*g)(x) * kGaussW[q] * h;
                for (int i = 0; i < 4; ++i)
                    if (map[2 * e + i] >= 0)
                        sys.F(map[2 * e + i]) += gx * b.v[i];
            }
    }
    return sys;
}

Eigen::SparseMatrix<double> weighted_gram_1d(int elements, double w2) {
    return assemble_matrix(elements, [&](double, const Basis &b, double w, double (&Ke)[4][4]) {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                Ke[i][j] += w * (b.v[i] * b.v[j] + b.d1[i] * b.d1[j] + w2 * b.d2[i] * b.d2[j]);
    });
}

Solution1D solve_bvp_1d(const Coefficients1D &c, const Fn1 &g, int elements) {
    const auto sys = assemble_1d(c, &g, elements);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys.B);
    const double min_pivot = ldlt.info() == Eigen::Success ? ldlt.vectorD().minCoeff() : 0.0;
    if (!(min_pivot > 0.0))
        throw CoercivityError("assembled form is not positive definite (smallest pivot " +
                                  std::to_string(min_pivot) + ")",
                              min_pivot);
    const Eigen::VectorXd u = ldlt.solve(sys.F);
    Solution1D sol(elements, expand(u, elements));
    sol.energy = u.dot(sys.B * u);
    sol.load_work = u.dot(sys.F);
    sol.min_pivot = min_pivot;
    return sol;
}

Fn1 periodic_K(const CoefficientField &field, double eps) {
    require_1d(field);
    return [&field, eps](double x) { return field.K_data(cell_node(field, x, eps))[0]; };
}

Fn1 periodic_S(const CoefficientField &field, double eps) {
    require_1d(field);
    return [&field, eps](double x) { return field.S_data(cell_node(field, x, eps))[0]; };
}

Fn1 periodic_A(const CoefficientField &field, double eps) {
    require_1d(field);
    return [&field, eps](double x) { return field.A_data(cell_node(field, x, eps))[0]; };
}

Coefficients1D fine_coefficients(const CoefficientField &field, double eps, Regime regime) {
    const auto m = regime_multipliers(regime);
    if (m.s_in_sigma != m.s_in_mu)
        throw UnsupportedRegime("asymmetric S scaling has no variational form");
    const double fs = std::pow(eps, m.s_in_sigma);
    const double fa = std::pow(eps, m.a_in_mu);
    Coefficients1D c;
    c.K = periodic_K(field, eps);
    c.s = [S = periodic_S(field, eps), fs](double x) { return fs * S(x); };
    c.a = [A = periodic_A(field, eps), fa](double x) { return fa * A(x); };
    return c;
}

int fine_elements(double eps, const MeshParams &mesh) {
    if (!(eps > 0.0) || eps > 1.0)
        throw GeometryError("epsilon must lie in (0, 1]");
    const double inv = 1.0 / eps;
    const long cells = std::lround(inv);
    if (std::abs(inv - static_cast<double>(cells)) > 1e-9 * inv)
        throw GeometryError("1/epsilon must be an integer, got epsilon=" + std::to_string(eps));
    if (mesh.elements_per_period < 8)
        throw GeometryError("fine solves need at least 8 elements per period");
    return static_cast<int>(cells) * mesh.elements_per_period;
}

Solution1D solve_fine_1d(const CoefficientField &field, double eps, Regime regime, const Fn1 &g,
                         const MeshParams &mesh) {
    const int elements = fine_elements(eps, mesh);
    return solve_bvp_1d(fine_coefficients(field, eps, regime), g, elements);
}

Solution1D solve_homog_hs1_1d(double K_eff, const Fn1 &g, int elements) {
    if (!(K_eff > 0.0))
        throw InvalidMaterial("effective stiffness must be positive");
    Coefficients1D c{[K_eff](double) { return K_eff; }, nullptr, nullptr};
    return solve_bvp_1d(c, g, elements);
}

Solution1D solve_homog_hs2_1d(double K_mean, double A_eff, const Fn1 &g, int elements) {
    if (!(K_mean > 0.0) || !(A_eff > 0.0))
        throw InvalidMaterial("homogenized second-gradient problem needs K > 0 and A > 0");
    Coefficients1D c{[K_mean](double) { return K_mean; }, nullptr, [A_eff](double) { return A_eff; }};
    return solve_bvp_1d(c, g, elements);
}

namespace {

template <typename Integrand>
double integrate(int elements, Integrand &&f) {
    const double h = 1.0 / elements;
    double s = 0.0;
    for (int e = 0; e < elements; ++e)
        for (int q = 0; q < 4; ++q)
            s += kGaussW[q] * h * f((e + kGaussT[q]) * h);
    return s;
}

int common_mesh(const Solution1D &u, const Solution1D &v) {
    const long l = std::lcm(static_cast<long>(u.elements()), static_cast<long>(v.elements()));
    return l <= (1L << 16) ? static_cast<int>(l) : 4 * std::max(u.elements(), v.elements());
}

} // namespace

double l2_distance(const Solution1D &u, const Solution1D &v) {
    return std::sqrt(integrate(common_mesh(u, v), [&](double x) {
        const double d = u.value(x) - v.value(x);
        return d * d;
    }));
}

double h1_distance(const Solution1D &u, const Solution1D &v) {
    return std::sqrt(integrate(common_mesh(u, v), [&](double x) {
        const double d = u.d1(x) - v.d1(x);
        return d * d;
    }));
}

double l2_norm(const Fn1 &g) {
    return std::sqrt(integrate(512, [&](double x) { return g(x) * g(x); }));
}

Fn1 parse_load(const std::string &spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ConfigError("load must look like kind:value, got '" + spec + "'");
    const std::string kind = spec.substr(0, colon);
    double value = 0.0;
    try {
        size_t used = 0;
        value = std::stod(spec.substr(colon + 1), &used);
        if (used != spec.size() - colon - 1)
            throw ConfigError("trailing characters in load '" + spec + "'");
    } catch (const std::logic_error &) {
        throw ConfigError("load value is not a number in '" + spec + "'");
    }
    if (kind == "const")
        return [value](double) { return value; };
    if (kind == "sin")
        return [value](double x) { return std::sin(value * std::numbers::pi * x); };
    if (kind == "lin")
        return [value](double x) { return value * (x - 0.5); };
    throw ConfigError("unknown load kind '" + kind + "' (const, sin, lin)");
}

Effective1D effective_1d(const CoefficientField &field, Regime regime, const SolverParams &params) {
    require_1d(field);
    Effective1D out;
    if (regime == Regime::HS1) {
        const auto corr = solve_all_hs1(field, params);
        out.K = assemble_K_eff(field, corr)(0, 0, 0, 0);
        out.residual = residual(field, corr);
    } else if (regime == Regime::HS2) {
        const auto corr = solve_all_hs2(field, params);
        out.K = assemble_K_mean(field)(0, 0, 0, 0);
        out.A = assemble_A_eff(field, corr)(0, 0, 0, 0, 0, 0);
        out.residual = residual(field, corr);
    } else {
        throw UnsupportedRegime("only HS1 and HS2 have a homogenized macro problem");
    }
    return out;
}

double stability_constant(const CoefficientField &field, double eps, Regime regime, int loads,
                          std::uint64_t seed, const MeshParams &mesh) {
    const int elements = fine_elements(eps, mesh);
    const auto coeff = fine_coefficients(field, eps, regime);
    const double w = regime == Regime::HS1 ? eps * eps : 1.0;
    const auto W = weighted_gram_1d(elements, w);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    for (int l = 0; l < loads; ++l) {
        std::array<double, 4> c{};
        for (double &ck : c)
            ck = normal(rng);
        const Fn1 g = [c](double x) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k)
                s += c[k] * std::sin((k + 1) * std::numbers::pi * x);
            return s;
        };
        const auto sol = solve_bvp_1d(coeff, g, elements);
        const auto map = reduced_map(elements);
        Eigen::VectorXd u(W.rows());
        for (size_t gdof = 0; gdof < map.size(); ++gdof)
            if (map[gdof] >= 0)
                u(map[gdof]) = sol.dofs()[gdof];
        worst = std::max(worst, std::sqrt(u.dot(W * u)) / l2_norm(g));
    }
    return worst;
}

ConvergenceTable convergence_study(const CoefficientField &field, Regime regime,
                                   const std::vector<double> &eps_list, const Fn1 &g,
                                   const SolverParams &params, const MeshParams &mesh, std::uint64_t seed) {
    ConvergenceTable table;
    table.effective = effective_1d(field, regime, params);
    const auto homog = regime == Regime::HS1
                           ? solve_homog_hs1_1d(table.effective.K, g, mesh.homog_elements)
                           : solve_homog_hs2_1d(table.effective.K, table.effective.A, g, mesh.homog_elements);
    table.rows.resize(eps_list.size());
    parallel_for(eps_list.size(), params.threads, [&](size_t i) {
        const double eps = eps_list[i];
        const auto fine = solve_fine_1d(field, eps, regime, g, mesh);
        auto &row = table.rows[i];
        row.epsilon = eps;
        row.l2_error = l2_distance(fine, homog);
        row.h1_error = h1_distance(fine, homog);
        row.energy_fine = fine.energy;
        row.energy_homog = homog.energy;
        row.stability_const = stability_constant(field, eps, regime, 5, seed, mesh);
    });
    return table;
}

std::vector<SIndependenceRow> s_independence_probe(const CoefficientField &field1,
                                                   const CoefficientField &field2, Regime regime,
                                                   const std::vector<double> &eps_list, const Fn1 &g,
                                                   const MeshParams &mesh, int threads) {
    require_1d(field1);
    require_1d(field2);
    if (!(field1.grid() == field2.grid()))
        throw DimensionMismatch("S-independence probe needs both fields on one grid");
    const auto K1 = field1.K_all(), K2 = field2.K_all();
    const auto A1 = field1.A_all(), A2 = field2.A_all();
    if (!std::equal(K1.begin(), K1.end(), K2.begin()) || !std::equal(A1.begin(), A1.end(), A2.begin()))
        throw ConsistencyError("S-independence probe needs identical K and A");
    std::vector<SIndependenceRow> rows(eps_list.size());
    parallel_for(eps_list.size(), threads, [&](size_t i) {
        const auto u1 = solve_fine_1d(field1, eps_list[i], regime, g, mesh);
        const auto u2 = solve_fine_1d(field2, eps_list[i], regime, g, mesh);
        rows[i] = {eps_list[i], l2_distance(u1, u2)};
    });
    return rows;
}

CoercivityReport coercivity_probe(const CoefficientField &field, double eps, Regime regime, int trials,
                                  std::uint64_t seed, const MeshParams &mesh) {
    const int elements = fine_elements(eps, mesh);
    const auto sys = assemble_1d(fine_coefficients(field, eps, regime), nullptr, elements);
    const double w = regime == Regime::HS1 ? eps * eps : 1.0;
    const auto W = weighted_gram_1d(elements, w);

    CoercivityReport r;
    r.trials = trials;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    r.c_rayleigh = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXd v(sys.B.rows());
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v(i) = normal(rng);
        r.c_rayleigh = std::min(r.c_rayleigh, v.dot(sys.B * v) / v.dot(W * v));
    }

    // Sylvester inertia: the number of negative LDL^T pivots of B - lambda W counts the
    // generalized eigenvalues below lambda.
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.analyzePattern(sys.B);
    auto below = [&](double lambda) {
        const Eigen::SparseMatrix<double> M = sys.B - lambda * W;
        ldlt.factorize(M);
        if (ldlt.info() != Eigen::Success)
            return 1L;
        return static_cast<long>((ldlt.vectorD().array() < 0.0).count());
    };
    double hi = r.c_rayleigh;
    double step = std::max(1.0, std::abs(hi));
    double lo = hi - step;
    while (below(lo) > 0) {
        step *= 2.0;
        lo = hi - step;
        if (step > 1e30)
            throw NumericError("coercivity bracket did not close");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (below(mid) > 0 ? hi : lo) = mid;
    }
    r.c_est = lo;
    r.passes = r.c_est > 0.0;
    return r;
}

} // namespace gradhom
