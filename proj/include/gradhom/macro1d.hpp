#pragma once

// One-dimensional macro problems on (0,1) with u(0) = u(1) = 0 and free u' at the ends.
//
//   find u with  int (K u' + s u'') v' + (a u'' + s u') v'' = int g v
//
// discretized by C1 Hermite cubics on a uniform mesh. The double traction a u'' + s u' vanishes
// weakly at both ends because u' is left unconstrained.

#include "gradhom/cell_solver.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gradhom {

using Fn1 = std::function<double(double)>;

/// Coefficients of the bilinear form, already carrying any epsilon factors.
struct Coefficients1D {
    Fn1 K;
    Fn1 s; // couples u'' into sigma and u' into mu
    Fn1 a;
};

class Solution1D {
public:
    Solution1D() = default;
    Solution1D(int elements, std::vector<double> dofs);

    int elements() const { return elements_; }
    double h() const { return 1.0 / elements_; }
    /// Interleaved (u_i, u'_i), i = 0..elements.
    const std::vector<double> &dofs() const { return dofs_; }

    double value(double x) const;
    double d1(double x) const;
    double d2(double x) const;

    double energy = 0.0;    // B[u,u]
    double load_work = 0.0; // int g u
    double min_pivot = 0.0; // smallest LDL^T pivot of the reduced stiffness

private:
    int elements_ = 0;
    std::vector<double> dofs_;
    // element index and local coordinate t in [0,1]
    std::pair<int, double> locate(double x) const;
};

/// Stiffness for the form above, with u(0), u(1) eliminated. Also assembles the load when g is set.
struct System1D {
    int elements = 0;
    std::vector<int> free_dofs; // global dof of each reduced unknown
    Eigen::SparseMatrix<double> B;
    Eigen::VectorXd F;
};

System1D assemble_1d(const Coefficients1D &c, const Fn1 *g, int elements);
/// Gram matrix of ||v||^2 + ||v'||^2 + w ||v''||^2 on the reduced space.
Eigen::SparseMatrix<double> weighted_gram_1d(int elements, double w);

/// Solves the assembled system; throws CoercivityError when an LDL^T pivot is not positive.
Solution1D solve_bvp_1d(const Coefficients1D &c, const Fn1 &g, int elements);

/// K(x/eps), S(x/eps), A(x/eps) looked up piecewise-constantly on the cell grid.
Fn1 periodic_K(const CoefficientField &field, double eps);
Fn1 periodic_S(const CoefficientField &field, double eps);
Fn1 periodic_A(const CoefficientField &field, double eps);

/// The fine problem with the regime's epsilon powers on S and A.
Coefficients1D fine_coefficients(const CoefficientField &field, double eps, Regime regime);

struct MeshParams {
    int elements_per_period = 16;
    int homog_elements = 256;
};

/// Number of elements for a fine solve at eps; throws GeometryError unless 1/eps is an integer
/// and there are at least 8 elements per period.
int fine_elements(double eps, const MeshParams &mesh);

Solution1D solve_fine_1d(const CoefficientField &field, double eps, Regime regime, const Fn1 &g,
                         const MeshParams &mesh = {});
Solution1D solve_homog_hs1_1d(double K_eff, const Fn1 &g, int elements);
Solution1D solve_homog_hs2_1d(double K_mean, double A_eff, const Fn1 &g, int elements);

/// L2 and H1-seminorm distance, integrated on the finer of the two meshes.
double l2_distance(const Solution1D &u, const Solution1D &v);
double h1_distance(const Solution1D &u, const Solution1D &v);
/// L2 norm of g on (0,1).
double l2_norm(const Fn1 &g);

/// Parses "const:c", "sin:k" (sin(k pi x)) or "lin:c" (c (x - 1/2)).
Fn1 parse_load(const std::string &spec);

/// Effective scalars of a 1D field for the macro problem of a regime.
struct Effective1D {
    double K = 0.0; // K_eff (HS1) or <K> (HS2)
    double A = 0.0; // A_eff (HS2), 0 for HS1
    double residual = 0.0;
};
Effective1D effective_1d(const CoefficientField &field, Regime regime, const SolverParams &params);

struct ConvergenceRow {
    double epsilon = 0.0;
    double l2_error = 0.0;
    double h1_error = 0.0;
    double energy_fine = 0.0;
    double energy_homog = 0.0;
    double stability_const = 0.0;
};

struct ConvergenceTable {
    Effective1D effective;
    std::vector<ConvergenceRow> rows;
};

/// Cell solve, effective coefficients, homogenized solve, then fine solves per eps.
ConvergenceTable convergence_study(const CoefficientField &field, Regime regime,
                                   const std::vector<double> &eps_list, const Fn1 &g,
                                   const SolverParams &params = {}, const MeshParams &mesh = {},
                                   std::uint64_t seed = 1);

/// Worst (||u||_{H1}^2 + w ||u''||^2)^{1/2} / ||g|| over `loads` random trigonometric loads, with w
/// the regime's weight on the Hessian (eps^2 for HS1, 1 for HS2).
double stability_constant(const CoefficientField &field, double eps, Regime regime, int loads,
                          std::uint64_t seed, const MeshParams &mesh = {});

struct SIndependenceRow {
    double epsilon = 0.0;
    double l2_difference = 0.0;
};

/// ||u_eps[S1] - u_eps[S2]||_{L2} per eps; the two fields must share K and A.
std::vector<SIndependenceRow> s_independence_probe(const CoefficientField &field1,
                                                   const CoefficientField &field2, Regime regime,
                                                   const std::vector<double> &eps_list, const Fn1 &g,
                                                   const MeshParams &mesh = {}, int threads = 1);

struct CoercivityReport {
    double c_est = 0.0;      // smallest generalized eigenvalue of (B, W)
    double c_rayleigh = 0.0; // smallest sampled Rayleigh quotient
    int trials = 0;
    bool passes = false;
};

/// Lower bound of B[v,v] / (||v||_{H1}^2 + w ||v''||^2) on the fine discrete space.
CoercivityReport coercivity_probe(const CoefficientField &field, double eps, Regime regime, int trials = 100,
                                  std::uint64_t seed = 1, const MeshParams &mesh = {});

} // namespace gradhom
