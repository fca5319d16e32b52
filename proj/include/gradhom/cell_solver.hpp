#pragma once

// Matrix-free spectral solver for the two periodic corrector problems on Y.
//
//   HS1:  find phi^{ab} zero-mean with
//         int K grad(phi) : grad(psi) + A hess(phi) : hess(psi) = -int K (e_a x e_b) : grad(psi)
//   HS2:  find w^{abc} zero-mean with
//         int A hess(w) : hess(psi) = -int A (e_a x e_b x e_c) : hess(psi)
//
// The third-order unit tensor is taken in the Hessian's slot order, E_{nlp} = d_an d_bl d_cp.

#include "gradhom/microstructure.hpp"
#include "gradhom/scaling.hpp"
#include "gradhom/spectral.hpp"

#include <array>
#include <vector>

namespace gradhom {

struct SolverParams {
    double rel_tol = 1e-9;
    int max_iter = 2000;
    /// Reference medium of the preconditioner; <= 0 selects the node mean of min-eigenvalues.
    double c_ref = 0.0;
    double a_ref = 0.0;
    int threads = 1;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> history;
};

struct CorrectorHS1 {
    CellGrid grid;
    int d = 0;
    std::vector<PeriodicVectorField> phi; // index a*d + b
    std::vector<SolveStats> stats;

    const PeriodicVectorField &at(int a, int b) const { return phi.at(static_cast<size_t>(a * d + b)); }
};

struct CorrectorHS2 {
    CellGrid grid;
    int d = 0;
    std::vector<PeriodicVectorField> w; // index (a*d + b)*d + c
    std::vector<SolveStats> stats;

    const PeriodicVectorField &at(int a, int b, int c) const {
        return w.at(static_cast<size_t>((a * d + b) * d + c));
    }
};

/// The cell operator of one regime bound to a coefficient field.
class CellOperator {
public:
    CellOperator(const CoefficientField &field, Regime regime);

    const CoefficientField &field() const { return field_; }
    const SpectralOps &ops() const { return ops_; }
    Regime regime() const { return regime_; }

    /// r = grad^T K grad u [+ hess^T A hess u], mean removed.
    PeriodicVectorField apply(const PeriodicVectorField &u) const;
    /// Load vector b with dot(b, psi) = -int K(e_a x e_b) : grad(psi).
    PeriodicVectorField rhs_hs1(int a, int b) const;
    /// Load vector b with dot(b, psi) = -int A(e_a x e_b x e_c) : hess(psi).
    PeriodicVectorField rhs_hs2(int a, int b, int c) const;

    PeriodicVectorField stress(const PeriodicVectorField &G) const;       // K G per node
    PeriodicVectorField hyperstress(const PeriodicVectorField &Q) const;  // A Q per node

private:
    const CoefficientField &field_;
    Regime regime_;
    SpectralOps ops_;
};

/// int_Y K grad(phi) : grad(psi) + A hess(phi) : hess(psi)
double apply_hs1_form(const CoefficientField &field, const PeriodicVectorField &phi,
                      const PeriodicVectorField &psi);
/// int_Y A hess(w) : hess(psi)
double apply_hs2_form(const CoefficientField &field, const PeriodicVectorField &w,
                      const PeriodicVectorField &psi);
/// -int_Y K (e_a x e_b) : grad(psi)
double hs1_rhs(const CoefficientField &field, int alpha, int beta, const PeriodicVectorField &psi);
/// -int_Y A (e_a x e_b x e_c) : hess(psi)
double hs2_rhs(const CoefficientField &field, int alpha, int beta, int gamma,
               const PeriodicVectorField &psi);

/// Reference medium used when params leave c_ref / a_ref unset.
std::pair<double, double> default_reference_medium(const CoefficientField &field);

PeriodicVectorField solve_corrector_hs1(const CoefficientField &field, int alpha, int beta,
                                        const SolverParams &params, SolveStats *stats = nullptr);
PeriodicVectorField solve_corrector_hs2(const CoefficientField &field, int alpha, int beta, int gamma,
                                        const SolverParams &params, SolveStats *stats = nullptr);

/// All d^2 (resp. d^3) correctors; independent solves run on params.threads workers.
CorrectorHS1 solve_all_hs1(const CoefficientField &field, const SolverParams &params);
CorrectorHS2 solve_all_hs2(const CoefficientField &field, const SolverParams &params);

/// Relative residual ||b - L u|| / ||b|| of a corrector against its load.
double residual_hs1(const CoefficientField &field, const PeriodicVectorField &phi, int alpha, int beta);
double residual_hs2(const CoefficientField &field, const PeriodicVectorField &w, int alpha, int beta,
                    int gamma);
/// Largest relative residual over a corrector set.
double residual(const CoefficientField &field, const CorrectorHS1 &corr);
double residual(const CoefficientField &field, const CorrectorHS2 &corr);

} // namespace gradhom
