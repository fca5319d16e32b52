#include "gradhom/microstructure.hpp"

#include "gradhom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gradhom {

CellGrid::CellGrid(int d, int N) : d_(d), n_(N) {
    check_dimension(d);
    if (N < 4 || N % 2 != 0)
        throw GeometryError("cell grid needs an even N >= 4, got " + std::to_string(N));
    num_nodes_ = static_cast<size_t>(ipow(N, d));
}

std::array<int, 3> CellGrid::multi_index(size_t node) const {
    std::array<int, 3> m{0, 0, 0};
    for (int a = d_ - 1; a >= 0; --a) {
        m[a] = static_cast<int>(node % n_);
        node /= n_;
    }
    return m;
}

size_t CellGrid::flat_index(const std::array<int, 3> &m) const {
    size_t f = 0;
    for (int a = 0; a < d_; ++a)
        f = f * n_ + static_cast<size_t>(((m[a] % n_) + n_) % n_);
    return f;
}

std::array<double, 3> CellGrid::position(size_t node) const {
    const auto m = multi_index(node);
    std::array<double, 3> y{0.0, 0.0, 0.0};
    for (int a = 0; a < d_; ++a)
        y[a] = coord(m[a]);
    return y;
}

size_t CellGrid::mirror(size_t node) const {
    auto m = multi_index(node);
    for (int a = 0; a < d_; ++a)
        m[a] = n_ - 1 - m[a];
    return flat_index(m);
}

void Material::validate() const {
    const int d = K.dim();
    if (S.dim() != d || A.dim() != d)
        throw InvalidMaterial("material tensors have mismatched dimensions");
    if (!K.all_finite() || !S.all_finite() || !A.all_finite())
        throw InvalidMaterial("material tensors must be finite");
    const auto ek = ellipticity_estimate(K);
    if (!ek.is_elliptic)
        throw InvalidMaterial("K is not elliptic (min eigenvalue " + std::to_string(ek.min_eigenvalue) +
                              ")");
    const auto ea = ellipticity_estimate(A);
    if (!ea.is_elliptic)
        throw InvalidMaterial("A is not elliptic (min eigenvalue " + std::to_string(ea.min_eigenvalue) +
                              ")");
}

Material make_material(Tensor4 K, Tensor6 A) {
    const int d = K.dim();
    return Material{std::move(K), Tensor5(d), std::move(A)};
}

std::span<const double> Tensor5Field::at(size_t node) const {
    const size_t stride = static_cast<size_t>(ipow(grid.dim(), 5));
    return std::span<const double>(data).subspan(node * stride, stride);
}

CoefficientField::CoefficientField(CellGrid grid) : grid_(grid) {
    const int d = grid_.dim();
    k_stride_ = static_cast<size_t>(ipow(d, 4));
    s_stride_ = static_cast<size_t>(ipow(d, 5));
    a_stride_ = static_cast<size_t>(ipow(d, 6));
    K_.assign(grid_.num_nodes() * k_stride_, 0.0);
    S_.assign(grid_.num_nodes() * s_stride_, 0.0);
    A_.assign(grid_.num_nodes() * a_stride_, 0.0);
}

std::span<const double> CoefficientField::K_data(size_t node) const {
    return std::span<const double>(K_).subspan(node * k_stride_, k_stride_);
}
std::span<const double> CoefficientField::S_data(size_t node) const {
    return std::span<const double>(S_).subspan(node * s_stride_, s_stride_);
}
std::span<const double> CoefficientField::A_data(size_t node) const {
    return std::span<const double>(A_).subspan(node * a_stride_, a_stride_);
}

Tensor4 CoefficientField::K_at(size_t node) const {
    auto s = K_data(node);
    return Tensor4(dim(), std::vector<double>(s.begin(), s.end()));
}
Tensor5 CoefficientField::S_at(size_t node) const {
    auto s = S_data(node);
    return Tensor5(dim(), std::vector<double>(s.begin(), s.end()));
}
Tensor6 CoefficientField::A_at(size_t node) const {
    auto s = A_data(node);
    return Tensor6(dim(), std::vector<double>(s.begin(), s.end()));
}

void CoefficientField::set(size_t node, const Material &m) {
    if (m.dim() != dim())
        throw DimensionMismatch("material dimension does not match the cell grid");
    set_raw(node, m.K.data(), m.S.data(), m.A.data());
}

void CoefficientField::set_raw(size_t node, std::span<const double> K, std::span<const double> S,
                               std::span<const double> A) {
    if (K.size() != k_stride_ || S.size() != s_stride_ || A.size() != a_stride_)
        throw DimensionMismatch("tensor block sizes do not match the cell grid dimension");
    std::copy(K.begin(), K.end(), K_.begin() + node * k_stride_);
    std::copy(S.begin(), S.end(), S_.begin() + node * s_stride_);
    std::copy(A.begin(), A.end(), A_.begin() + node * a_stride_);
}

void CoefficientField::set_S(const Tensor5Field &s) {
    if (!(s.grid == grid_))
        throw DimensionMismatch("S field grid does not match the coefficient field grid");
    S_ = s.data;
}

Tensor5Field CoefficientField::S_field() const { return Tensor5Field{grid_, S_}; }

std::pair<double, double> CoefficientField::min_ellipticity() const {
    double ck = INFINITY, ca = INFINITY;
    for (size_t n = 0; n < grid_.num_nodes(); ++n) {
        ck = std::min(ck, ellipticity_estimate(K_at(n)).min_eigenvalue);
        ca = std::min(ca, ellipticity_estimate(A_at(n)).min_eigenvalue);
    }
    return {ck, ca};
}

void CoefficientField::validate() const {
    for (double v : K_)
        if (!std::isfinite(v))
            throw InvalidMaterial("coefficient field has non-finite K entries");
    for (double v : S_)
        if (!std::isfinite(v))
            throw InvalidMaterial("coefficient field has non-finite S entries");
    for (double v : A_)
        if (!std::isfinite(v))
            throw InvalidMaterial("coefficient field has non-finite A entries");
    for (size_t n = 0; n < grid_.num_nodes(); ++n) {
        if (!ellipticity_estimate(K_at(n)).is_elliptic)
            throw InvalidMaterial("K not elliptic at node " + std::to_string(n));
        if (!ellipticity_estimate(A_at(n)).is_elliptic)
            throw InvalidMaterial("A not elliptic at node " + std::to_string(n));
    }
}

double signed_distance(const InclusionSpec &inc, std::span<const double> y) {
    const size_t d = y.size();
    switch (inc.shape) {
    case InclusionShape::Ball: {
        double r2 = 0.0;
        for (size_t a = 0; a < d; ++a)
            r2 += (y[a] - inc.center[a]) * (y[a] - inc.center[a]);
        return std::sqrt(r2) - inc.radius;
    }
    case InclusionShape::Box: {
        double outside = 0.0, inside = -INFINITY;
        for (size_t a = 0; a < d; ++a) {
            const double q = std::abs(y[a] - inc.center[a]) - inc.half_widths[a];
            outside += std::max(q, 0.0) * std::max(q, 0.0);
            inside = std::max(inside, q);
        }
        return std::sqrt(outside) + std::min(inside, 0.0);
    }
    case InclusionShape::LaminateSlab:
        return std::abs(y[inc.slab_axis] - inc.center[inc.slab_axis]) - inc.radius;
    }
    return 0.0;
}

namespace {

void check_inclusion(const InclusionSpec &inc, int d) {
    if (static_cast<int>(inc.center.size()) != d)
        throw GeometryError("inclusion center must have d coordinates");
    if (inc.smoothing_width < 0.0)
        throw GeometryError("smoothing_width must be >= 0");
    const double pad = 0.5 * inc.smoothing_width;
    auto inside = [&](int a, double half) {
        if (!(half > 0.0))
            throw GeometryError("inclusion extent must be positive");
        if (!(std::abs(inc.center[a]) + half + pad < 0.5))
            throw GeometryError("inclusion is not compactly inside Y along axis " + std::to_string(a));
    };
    switch (inc.shape) {
    case InclusionShape::Ball:
        for (int a = 0; a < d; ++a)
            inside(a, inc.radius);
        break;
    case InclusionShape::Box:
        if (static_cast<int>(inc.half_widths.size()) != d)
            throw GeometryError("box inclusion needs d half-widths");
        for (int a = 0; a < d; ++a)
            inside(a, inc.half_widths[a]);
        break;
    case InclusionShape::LaminateSlab:
        if (inc.slab_axis < 0 || inc.slab_axis >= d)
            throw GeometryError("slab axis out of range");
        // a slab spans Y transversally; compactness is required along its normal only
        inside(inc.slab_axis, inc.radius);
        break;
    }
}

// Weight of phase 1 for signed distance sd.
double phase1_weight(double sd, double w) {
    if (w == 0.0)
        return sd < 0.0 ? 1.0 : 0.0;
    if (sd <= -0.5 * w)
        return 1.0;
    if (sd >= 0.5 * w)
        return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * (sd + 0.5 * w) / w));
}

void blend_into(CoefficientField &f, size_t node, double t, const Material &p1, const Material &p2) {
    if (t == 1.0)
        return f.set(node, p1);
    if (t == 0.0)
        return f.set(node, p2);
    auto mix = [t](std::span<const double> a, std::span<const double> b) {
        std::vector<double> out(a.size());
        for (size_t i = 0; i < a.size(); ++i)
            out[i] = t * a[i] + (1.0 - t) * b[i];
        return out;
    };
    f.set_raw(node, mix(p1.K.data(), p2.K.data()), mix(p1.S.data(), p2.S.data()),
              mix(p1.A.data(), p2.A.data()));
}

void check_phases(const CellGrid &grid, const Material &p1, const Material &p2) {
    p1.validate();
    p2.validate();
    if (p1.dim() != grid.dim() || p2.dim() != grid.dim())
        throw DimensionMismatch("phase dimension does not match the cell grid");
}

} // namespace

CoefficientField constant_field(const CellGrid &grid, const Material &m) {
    m.validate();
    if (m.dim() != grid.dim())
        throw DimensionMismatch("material dimension does not match the cell grid");
    CoefficientField f(grid);
    for (size_t n = 0; n < grid.num_nodes(); ++n)
        f.set(n, m);
    return f;
}

CoefficientField two_phase(const CellGrid &grid, const InclusionSpec &inc, const Material &phase1,
                           const Material &phase2) {
    check_phases(grid, phase1, phase2);
    check_inclusion(inc, grid.dim());
    CoefficientField f(grid);
    for (size_t n = 0; n < grid.num_nodes(); ++n) {
        const auto y = grid.position(n);
        const double sd = signed_distance(inc, std::span<const double>(y.data(), grid.dim()));
        blend_into(f, n, phase1_weight(sd, inc.smoothing_width), phase1, phase2);
    }
    return f;
}

CoefficientField laminate(const CellGrid &grid, int axis, double fraction, const Material &phase1,
                          const Material &phase2) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw GeometryError("laminate fraction must lie in (0, 1)");
    if (axis < 0 || axis >= grid.dim())
        throw GeometryError("laminate axis out of range");
    check_phases(grid, phase1, phase2);
    CoefficientField f(grid);
    for (size_t n = 0; n < grid.num_nodes(); ++n) {
        const double s = grid.position(n)[axis] + 0.5;
        f.set(n, s < fraction ? phase1 : phase2);
    }
    return f;
}

Tensor5 chiral_pattern(int d) {
    Tensor5 P(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            P(i, j, i, j, 0) = 1.0 / d;
    return P;
}

Tensor5Field chiral_S(const CellGrid &grid, double amplitude, double pitch) {
    if (!(pitch >= 1.0) || std::floor(pitch) != pitch)
        throw GeometryError("chiral pitch must be an integer >= 1 for Y-periodicity");
    const Tensor5 P = chiral_pattern(grid.dim());
    const size_t stride = P.size();
    Tensor5Field out{grid, std::vector<double>(grid.num_nodes() * stride, 0.0)};
    for (size_t n = 0; n < grid.num_nodes(); ++n) {
        const double arg = 2.0 * std::numbers::pi * pitch * grid.position(n)[0];
        // odd by construction so that S(-y) = -S(y) holds bit-exactly
        const double s = amplitude * std::copysign(std::sin(std::abs(arg)), arg);
        for (size_t e = 0; e < stride; ++e)
            out.data[n * stride + e] = s * P.data()[e];
    }
    return out;
}

InversionSplit inversion_defect(const Tensor5Field &field) {
    const size_t stride = static_cast<size_t>(ipow(field.grid.dim(), 5));
    const size_t nn = field.grid.num_nodes();
    double odd = 0.0, even = 0.0;
    for (size_t n = 0; n < nn; ++n) {
        const size_t m = field.grid.mirror(n);
        for (size_t e = 0; e < stride; ++e) {
            const double a = field.data[n * stride + e];
            const double b = field.data[m * stride + e];
            even += 0.25 * (a + b) * (a + b);
            odd += 0.25 * (a - b) * (a - b);
        }
    }
    return {std::sqrt(odd / nn), std::sqrt(even / nn)};
}

} // namespace gradhom
