#pragma once

// Discrete periodic unfolding on the box (0,1)^d.
//
// Fine nodes sit at x_m = (m + 1/2) h, m = 0..n_fine-1 per axis. An eps-cell holds n_y nodes per
// axis, eps = n_y h. Cell l covers [eps l, eps (l+1)) and its local node j sits at
// y_j = (j + 1/2)/n_y - 1/2, so x = eps (l + 1/2 + y) reproduces the fine node exactly.
// When n_y does not divide n_fine the trailing nodes per axis form Lambda_eps^-.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace gradhom {

using Point = std::array<double, 3>;

class MacroGrid {
public:
    MacroGrid() = default;
    MacroGrid(int d, int n_fine, int n_y);
    /// From spacings; throws AlignmentError unless eps/h is an integer.
    static MacroGrid from_spacing(int d, double h, double eps);

    int dim() const { return d_; }
    int n_fine() const { return n_fine_; }
    int n_y() const { return n_y_; }
    int cells_per_axis() const { return n_fine_ / n_y_; }
    double h() const { return 1.0 / n_fine_; }
    double eps() const { return static_cast<double>(n_y_) / n_fine_; }
    bool aligned() const { return n_fine_ % n_y_ == 0; }

    size_t num_fine() const;
    size_t num_cells() const;
    size_t num_y() const;

    double x(int m) const { return (m + 0.5) / n_fine_; }
    double y(int j) const { return (j + 0.5) / n_y_ - 0.5; }
    Point fine_point(size_t node) const;
    Point y_point(size_t j) const;
    /// Fine node at (cell, local y-node).
    size_t fine_index(size_t cell, size_t j) const;
    /// Cell containing `node`, or -1 when it lies in Lambda_eps^-.
    std::int64_t cell_of(size_t node) const;

private:
    int d_ = 0;
    int n_fine_ = 0;
    int n_y_ = 0;
};

struct DomainDecomposition {
    std::vector<size_t> cells;  // flat cell indices in K_eps^-
    std::vector<size_t> lambda; // fine nodes outside every full cell
    size_t nodes_per_cell = 0;
};

DomainDecomposition decompose_domain(const MacroGrid &grid);

/// values[cell * num_y + j].
struct UnfoldedField {
    MacroGrid grid;
    std::vector<double> values;

    double at(size_t cell, size_t j) const { return values[cell * grid.num_y() + j]; }
};

UnfoldedField unfold(const std::vector<double> &phi, const MacroGrid &grid, int threads = 1);

/// Samples f at every fine node.
std::vector<double> sample(const MacroGrid &grid, const std::function<double(const Point &)> &f);

struct IntegralIdentity {
    double lhs = 0.0;
    double rhs = 0.0;
    double defect = 0.0;
    double l1_norm = 0.0; // h^d sum |phi| over the whole grid
};

IntegralIdentity integral_identity_check(const std::vector<double> &phi, const MacroGrid &grid);

struct ProductNormReport {
    double product_defect = 0.0; // max |T(phi psi) - T(phi) T(psi)|
    double unfolded_norm = 0.0;  // ||T(phi)||_{L2(Omega x Y)}
    double source_norm = 0.0;    // ||phi||_{L2(Omega)}
    bool product_exact = false;
    bool norm_bounded = false;
};

ProductNormReport product_and_norm_checks(const std::vector<double> &phi, const std::vector<double> &psi,
                                          const MacroGrid &grid);

struct ProbeRow {
    double eps = 0.0;
    double error = 0.0;
};

/// ||T(phi_eps) - a(x) psi(y)||_{L2(Omega x Y)} for phi_eps(x) = a(x) psi(x/eps - 1/2), with x sampled
/// at the fine nodes of each cell. n_y fixed, n_fine = n_y / eps.
std::vector<ProbeRow> two_scale_convergence_probe(const std::function<double(const Point &)> &a,
                                                  const std::function<double(const Point &)> &psi,
                                                  const std::vector<double> &eps_list, int d, int n_y);

/// Unfolded central second differences of eps^2 u(x) W(x/eps - 1/2), step h = eps/n_y, against
/// u(x) times the same stencil applied to W on the y-grid. Error in the discrete L2(Omega x Y)
/// norm summed over all Hessian entries.
std::vector<ProbeRow> hessian_compatibility_probe(const std::function<double(const Point &)> &u,
                                                  const std::function<double(const Point &)> &W,
                                                  const std::vector<double> &eps_list, int d, int n_y);

/// True when each error is strictly below the previous one.
bool strictly_decreasing(const std::vector<ProbeRow> &rows);

} // namespace gradhom
