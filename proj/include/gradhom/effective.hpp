#pragma once

// Effective tensors from solved correctors, plus structural diagnostics.

#include "gradhom/cell_solver.hpp"

#include <cstdint>
#include <optional>

namespace gradhom {

struct EffectiveDiagnostics {
    double sym_defect_K = 0.0;       // check_major_symmetry(K_eff)
    double sym_defect_A = 0.0;       // check_major_symmetry(A_eff)
    double min_eig_K = 0.0;          // of sym(K_eff)
    double min_eig_A = 0.0;          // of sym(A_eff)
    double field_c1 = 0.0;           // min over nodes of K's min-eigenvalue
    double field_kappa1 = 0.0;       // min over nodes of A's min-eigenvalue
    double voigt_margin_K = 0.0;     // min over samples of (<K> - K_eff) M:M
    double voigt_margin_A = 0.0;     // min over samples of (<A> - A_eff) Q:Q
    int samples = 0;
    bool has_K = false;
    bool has_A = false;
};

struct EffectiveTensors {
    std::optional<Tensor4> K_eff;  // HS1
    Tensor4 K_mean;                // <K>_Y
    std::optional<Tensor6> A_eff;  // HS2
    Tensor6 A_mean;                // <A>_Y, the Voigt bound for A_eff
    EffectiveDiagnostics diagnostics;
};

/// K_eff_{ij ab} = int_Y K_{ijkl} (d_ak d_bl + d phi^{ab}_k / dy_l).
Tensor4 assemble_K_eff(const CoefficientField &field, const CorrectorHS1 &corr);
/// Node average of K.
Tensor4 assemble_K_mean(const CoefficientField &field);
Tensor6 assemble_A_mean(const CoefficientField &field);
/// A_eff^{ijk}_{abc} = int_Y A^{ijk}_{nlp} (d_an d_bl d_cp + d2 w^{abc}_n / dy_l dy_p).
Tensor6 assemble_A_eff(const CoefficientField &field, const CorrectorHS2 &corr);

/// Symmetry defects, ellipticity and Voigt margins on `samples` random unit directions plus the
/// eigenbasis of sym(<T> - T_eff). Fills eff.diagnostics and returns it.
EffectiveDiagnostics verify_effective(EffectiveTensors &eff, const CoefficientField &field,
                                      int samples = 200, std::uint64_t seed = 1);

/// Minimum of (B - C) X : X over random unit X and the eigenbasis of sym(B - C).
double voigt_margin(const Matrix &upper, const Matrix &lower, int samples, std::uint64_t seed);

} // namespace gradhom
