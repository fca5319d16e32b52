#pragma once

// Fourier collocation on the periodic cell: FFTs, derivative symbols and their adjoints.
//
// First-derivative symbols drop the Nyquist mode; pure second derivatives keep it, mixed
// second derivatives are products of first-derivative symbols.

#include "gradhom/microstructure.hpp"

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace gradhom {

using cplx = std::complex<double>;

/// d-component real vector field on a CellGrid, stored component-major.
struct PeriodicVectorField {
    CellGrid grid;
    int components = 0;
    std::vector<double> data;

    PeriodicVectorField() = default;
    PeriodicVectorField(const CellGrid &g, int comps)
        : grid(g), components(comps), data(g.num_nodes() * static_cast<size_t>(comps), 0.0) {}

    std::span<double> component(int c) {
        return std::span<double>(data).subspan(static_cast<size_t>(c) * grid.num_nodes(),
                                               grid.num_nodes());
    }
    std::span<const double> component(int c) const {
        return std::span<const double>(data).subspan(static_cast<size_t>(c) * grid.num_nodes(),
                                                     grid.num_nodes());
    }
    double mean(int c) const;
    /// sqrt(mean over nodes of |u|^2), the discrete L2(Y) norm.
    double l2_norm() const;
    void remove_mean();
};

/// Inner product (1/|nodes|) sum u.v, the periodic-quadrature L2(Y) product.
double dot(const PeriodicVectorField &u, const PeriodicVectorField &v);

class SpectralOps {
public:
    explicit SpectralOps(const CellGrid &grid);
    ~SpectralOps();
    SpectralOps(const SpectralOps &) = delete;
    SpectralOps &operator=(const SpectralOps &) = delete;

    const CellGrid &grid() const { return grid_; }

    void forward(std::span<const double> in, std::span<cplx> out) const;
    /// Normalized inverse; returns the real part.
    void inverse(std::span<const cplx> in, std::span<double> out) const;

    /// First-derivative symbol along axis a at mode `mode` (i xi, Nyquist zeroed).
    cplx d1(size_t mode, int a) const { return {0.0, xi1_[mode * 3 + a]}; }
    /// Second-derivative symbol for axes (a, b).
    double d2(size_t mode, int a, int b) const;
    /// |xi~|^2 and sum_{ab} d2(a,b)^2 used by the reference-medium preconditioner.
    double sym2(size_t mode) const { return sym2_[mode]; }
    double sym4(size_t mode) const { return sym4_[mode]; }

    /// G_{kl} = du_k/dy_l, d^2 components.
    PeriodicVectorField gradient(const PeriodicVectorField &u) const;
    /// Q_{nlp} = d2u_n/dy_l dy_p, d^3 components.
    PeriodicVectorField hessian(const PeriodicVectorField &u) const;
    /// Adjoint of gradient with respect to dot(): sum_l (d_l)^* sigma_{kl}.
    PeriodicVectorField gradient_adjoint(const PeriodicVectorField &sigma) const;
    /// Adjoint of hessian with respect to dot().
    PeriodicVectorField hessian_adjoint(const PeriodicVectorField &mu) const;

private:
    struct Plans;
    CellGrid grid_;
    std::unique_ptr<Plans> plans_;
    std::vector<double> xi1_; // 3 per mode, Nyquist zeroed
    std::vector<double> xi_;  // 3 per mode, full
    std::vector<double> sym2_, sym4_;
};

/// L2(Y) distance between the trigonometric interpolants of two fields on grids of
/// possibly different resolution (same dimension and component count).
double trig_l2_distance(const PeriodicVectorField &a, const PeriodicVectorField &b);

} // namespace gradhom
