#include "gradhom/unfolding.hpp"

#include "gradhom/errors.hpp"
#include "gradhom/parallel.hpp"

#include <cmath>
#include <string>

namespace gradhom {

namespace {

size_t upow(size_t b, int e) {
    size_t r = 1;
    for (int i = 0; i < e; ++i)
        r *= b;
    return r;
}

// Row-major decomposition with axis 0 slowest.
std::array<int, 3> split(size_t flat, int n, int d) {
    std::array<int, 3> m{0, 0, 0};
    for (int a = d - 1; a >= 0; --a) {
        m[a] = static_cast<int>(flat % static_cast<size_t>(n));
        flat /= static_cast<size_t>(n);
    }
    return m;
}

size_t join(const std::array<int, 3> &m, int n, int d) {
    size_t flat = 0;
    for (int a = 0; a < d; ++a)
        flat = flat * static_cast<size_t>(n) + static_cast<size_t>(m[a]);
    return flat;
}

} // namespace

MacroGrid::MacroGrid(int d, int n_fine, int n_y) : d_(d), n_fine_(n_fine), n_y_(n_y) {
    if (d < 1 || d > 3)
        throw DimensionMismatch("macro grid dimension must be 1, 2 or 3");
    if (n_y < 1 || n_fine < n_y)
        throw AlignmentError("need 1 <= n_y <= n_fine, got n_y=" + std::to_string(n_y) +
                             " n_fine=" + std::to_string(n_fine));
}

MacroGrid MacroGrid::from_spacing(int d, double h, double eps) {
    if (!(h > 0.0) || !(eps > 0.0) || eps > 1.0)
        throw AlignmentError("spacings must satisfy 0 < h, 0 < eps <= 1");
    const double inv_h = 1.0 / h;
    const double ratio = eps / h;
    const double n_fine = std::round(inv_h);
    const double n_y = std::round(ratio);
    if (std::abs(inv_h - n_fine) > 1e-9 * inv_h)
        throw AlignmentError("1/h is not an integer");
    if (n_y < 1.0 || std::abs(ratio - n_y) > 1e-9 * ratio)
        throw AlignmentError("eps/h = " + std::to_string(ratio) + " is not an integer");
    return MacroGrid(d, static_cast<int>(n_fine), static_cast<int>(n_y));
}

size_t MacroGrid::num_fine() const { return upow(static_cast<size_t>(n_fine_), d_); }
size_t MacroGrid::num_cells() const { return upow(static_cast<size_t>(cells_per_axis()), d_); }
size_t MacroGrid::num_y() const { return upow(static_cast<size_t>(n_y_), d_); }

Point MacroGrid::fine_point(size_t node) const {
    const auto m = split(node, n_fine_, d_);
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < d_; ++a)
        p[a] = x(m[a]);
    return p;
}

Point MacroGrid::y_point(size_t j) const {
    const auto m = split(j, n_y_, d_);
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < d_; ++a)
        p[a] = y(m[a]);
    return p;
}

size_t MacroGrid::fine_index(size_t cell, size_t j) const {
    const auto l = split(cell, cells_per_axis(), d_);
    const auto m = split(j, n_y_, d_);
    std::array<int, 3> f{0, 0, 0};
    for (int a = 0; a < d_; ++a)
        f[a] = l[a] * n_y_ + m[a];
    return join(f, n_fine_, d_);
}

std::int64_t MacroGrid::cell_of(size_t node) const {
    const auto m = split(node, n_fine_, d_);
    const int cpa = cells_per_axis();
    std::array<int, 3> l{0, 0, 0};
    for (int a = 0; a < d_; ++a) {
        l[a] = m[a] / n_y_;
        if (l[a] >= cpa)
            return -1;
    }
    return static_cast<std::int64_t>(join(l, cpa, d_));
}

DomainDecomposition decompose_domain(const MacroGrid &grid) {
    DomainDecomposition out;
    out.nodes_per_cell = grid.num_y();
    out.cells.resize(grid.num_cells());
    for (size_t c = 0; c < out.cells.size(); ++c)
        out.cells[c] = c;
    for (size_t node = 0; node < grid.num_fine(); ++node)
        if (grid.cell_of(node) < 0)
            out.lambda.push_back(node);
    return out;
}

UnfoldedField unfold(const std::vector<double> &phi, const MacroGrid &grid, int threads) {
    if (phi.size() != grid.num_fine())
        throw DimensionMismatch("grid function has " + std::to_string(phi.size()) + " values, grid has " +
                                std::to_string(grid.num_fine()));
    UnfoldedField out{grid, std::vector<double>(grid.num_cells() * grid.num_y())};
    const size_t ny = grid.num_y();
    parallel_for(grid.num_cells(), threads, [&](size_t cell) {
        for (size_t j = 0; j < ny; ++j)
            out.values[cell * ny + j] = phi[grid.fine_index(cell, j)];
    });
    return out;
}

std::vector<double> sample(const MacroGrid &grid, const std::function<double(const Point &)> &f) {
    std::vector<double> out(grid.num_fine());
    for (size_t node = 0; node < out.size(); ++node)
        out[node] = f(grid.fine_point(node));
    return out;
}

IntegralIdentity integral_identity_check(const std::vector<double> &phi, const MacroGrid &grid) {
    const auto T = unfold(phi, grid);
    const double hd = std::pow(grid.h(), grid.dim());
    const double cell_measure = std::pow(grid.eps(), grid.dim());
    const double ny = static_cast<double>(grid.num_y());
    IntegralIdentity r;
    // Cell measure times the Y-average of T.
    for (size_t cell = 0; cell < grid.num_cells(); ++cell) {
        double s = 0.0;
        for (size_t j = 0; j < grid.num_y(); ++j)
            s += T.at(cell, j);
        r.lhs += cell_measure * (s / ny);
    }
    for (size_t node = 0; node < phi.size(); ++node) {
        r.l1_norm += std::abs(phi[node]) * hd;
        if (grid.cell_of(node) >= 0)
            r.rhs += phi[node] * hd;
    }
    r.defect = std::abs(r.lhs - r.rhs);
    return r;
}

ProductNormReport product_and_norm_checks(const std::vector<double> &phi, const std::vector<double> &psi,
                                          const MacroGrid &grid) {
    if (phi.size() != psi.size())
        throw DimensionMismatch("product check needs two functions on the same grid");
    std::vector<double> prod(phi.size());
    for (size_t i = 0; i < phi.size(); ++i)
        prod[i] = phi[i] * psi[i];
    const auto Tp = unfold(phi, grid);
    const auto Tq = unfold(psi, grid);
    const auto Tpq = unfold(prod, grid);
    ProductNormReport r;
    for (size_t i = 0; i < Tpq.values.size(); ++i)
        r.product_defect = std::max(r.product_defect, std::abs(Tpq.values[i] - Tp.values[i] * Tq.values[i]));
    r.product_exact = r.product_defect == 0.0;

    const double cell_measure = std::pow(grid.eps(), grid.dim());
    const double ny = static_cast<double>(grid.num_y());
    double t2 = 0.0;
    for (double v : Tp.values)
        t2 += v * v;
    r.unfolded_norm = std::sqrt(t2 * cell_measure / ny);
    const double hd = std::pow(grid.h(), grid.dim());
    double s2 = 0.0;
    for (double v : phi)
        s2 += v * v;
    r.source_norm = std::sqrt(s2 * hd);
    // |Y| = 1; allow for the different summation order.
    r.norm_bounded = r.unfolded_norm <= r.source_norm * (1.0 + 1e-14);
    return r;
}

namespace {

MacroGrid probe_grid(int d, double eps, int n_y) {
    const double cells = 1.0 / eps;
    const int n_cells = static_cast<int>(std::lround(cells));
    if (std::abs(cells - n_cells) > 1e-9 * cells)
        throw AlignmentError("probe needs 1/eps integral, got eps=" + std::to_string(eps));
    return MacroGrid(d, n_cells * n_y, n_y);
}

} // namespace

std::vector<ProbeRow> two_scale_convergence_probe(const std::function<double(const Point &)> &a,
                                                  const std::function<double(const Point &)> &psi,
                                                  const std::vector<double> &eps_list, int d, int n_y) {
    std::vector<ProbeRow> rows;
    for (double eps : eps_list) {
        const auto grid = probe_grid(d, eps, n_y);
        const auto phi = sample(grid, [&](const Point &x) {
            Point y{0.0, 0.0, 0.0};
            for (int k = 0; k < d; ++k)
                y[k] = x[k] / grid.eps() - 0.5;
            return a(x) * psi(y);
        });
        const auto T = unfold(phi, grid);
        const size_t ny = grid.num_y();
        std::vector<double> psi_y(ny);
        for (size_t j = 0; j < ny; ++j)
            psi_y[j] = psi(grid.y_point(j));
        // x runs over the fine nodes of each cell; weight h^d for x and 1/ny for y.
        const double hd = std::pow(grid.h(), d);
        double e2 = 0.0;
        for (size_t cell = 0; cell < grid.num_cells(); ++cell)
            for (size_t jx = 0; jx < ny; ++jx) {
                const double ax = a(grid.fine_point(grid.fine_index(cell, jx)));
                for (size_t j = 0; j < ny; ++j) {
                    const double diff = T.at(cell, j) - ax * psi_y[j];
                    e2 += diff * diff;
                }
            }
        rows.push_back({grid.eps(), std::sqrt(e2 * hd / static_cast<double>(ny))});
    }
    return rows;
}

namespace {

// Central second difference of f at p along axes (a, b) with step s.
double second_difference(const std::function<double(const Point &)> &f, const Point &p, int a, int b,
                         double s) {
    auto shifted = [&](double sa, double sb) {
        Point q = p;
        q[a] += sa;
        q[b] += sb;
        return f(q);
    };
    if (a == b)
        return (shifted(s, 0.0) - 2.0 * f(p) + shifted(-s, 0.0)) / (s * s);
    return (shifted(s, s) - shifted(s, -s) - shifted(-s, s) + shifted(-s, -s)) / (4.0 * s * s);
}

} // namespace

std::vector<ProbeRow> hessian_compatibility_probe(const std::function<double(const Point &)> &u,
                                                  const std::function<double(const Point &)> &W,
                                                  const std::vector<double> &eps_list, int d, int n_y) {
    std::vector<ProbeRow> rows;
    for (double eps_in : eps_list) {
        const auto grid = probe_grid(d, eps_in, n_y);
        const double eps = grid.eps();
        const double h = grid.h();
        const double hy = 1.0 / n_y;
        auto phi = [&](const Point &x) {
            Point y{0.0, 0.0, 0.0};
            for (int k = 0; k < d; ++k)
                y[k] = x[k] / eps - 0.5;
            return eps * eps * u(x) * W(y);
        };
        const size_t ny = grid.num_y();
        const double cell_measure = std::pow(eps, d);
        double e2 = 0.0;
        for (size_t cell = 0; cell < grid.num_cells(); ++cell)
            for (size_t j = 0; j < ny; ++j) {
                const Point x = grid.fine_point(grid.fine_index(cell, j));
                const Point y = grid.y_point(j);
                const double ux = u(x);
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b) {
                        const double unfolded = second_difference(phi, x, a, b, h);
                        const double target = ux * second_difference(W, y, a, b, hy);
                        const double diff = unfolded - target;
                        e2 += diff * diff;
                    }
            }
        rows.push_back({eps, std::sqrt(e2 * cell_measure / static_cast<double>(ny))});
    }
    return rows;
}

bool strictly_decreasing(const std::vector<ProbeRow> &rows) {
    for (size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].error < rows[i - 1].error))
            return false;
    return true;
}

} // namespace gradhom
