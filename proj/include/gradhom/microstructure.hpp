#pragma once

// Periodic coefficient fields on the unit cell Y = (-1/2, 1/2]^d.

#include "gradhom/tensor.hpp"

#include <array>
#include <span>
#include <vector>

namespace gradhom {

/// Uniform cell-centred grid with N nodes per axis; node m sits at y = (2m + 1 - N) / (2N).
/// Node index is row-major with axis 0 slowest.
class CellGrid {
public:
    CellGrid() = default;
    CellGrid(int d, int N);

    int dim() const { return d_; }
    int n() const { return n_; }
    size_t num_nodes() const { return num_nodes_; }

    double coord(int m) const { return static_cast<double>(2 * m + 1 - n_) / (2.0 * n_); }
    std::array<int, 3> multi_index(size_t node) const;
    size_t flat_index(const std::array<int, 3> &m) const;
    std::array<double, 3> position(size_t node) const;
    /// Node paired with `node` under y -> -y (exact on this grid).
    size_t mirror(size_t node) const;

    friend bool operator==(const CellGrid &a, const CellGrid &b) {
        return a.d_ == b.d_ && a.n_ == b.n_;
    }

private:
    int d_ = 0;
    int n_ = 0;
    size_t num_nodes_ = 0;
};

/// One homogeneous constituent.
struct Material {
    Tensor4 K;
    Tensor5 S;
    Tensor6 A;

    int dim() const { return K.dim(); }
    /// Throws InvalidMaterial unless K and A are strictly elliptic and dimensions agree.
    void validate() const;
};

/// Material with zero S.
Material make_material(Tensor4 K, Tensor6 A);

/// S(y) sampled on the grid, d^5 entries per node.
struct Tensor5Field {
    CellGrid grid;
    std::vector<double> data;

    std::span<const double> at(size_t node) const;
};

class CoefficientField {
public:
    CoefficientField() = default;
    explicit CoefficientField(CellGrid grid);

    const CellGrid &grid() const { return grid_; }
    int dim() const { return grid_.dim(); }

    Tensor4 K_at(size_t node) const;
    Tensor5 S_at(size_t node) const;
    Tensor6 A_at(size_t node) const;

    std::span<const double> K_data(size_t node) const;
    std::span<const double> S_data(size_t node) const;
    std::span<const double> A_data(size_t node) const;

    void set(size_t node, const Material &m);
    /// Writes raw tensor blocks; used by the blending constructors and the file reader.
    void set_raw(size_t node, std::span<const double> K, std::span<const double> S,
                 std::span<const double> A);
    void set_S(const Tensor5Field &s);
    Tensor5Field S_field() const;

    /// Smallest pointwise min-eigenvalues of K and A over all nodes.
    std::pair<double, double> min_ellipticity() const;
    /// Throws InvalidMaterial if K or A fails pointwise ellipticity at some node.
    void validate() const;

    std::span<const double> K_all() const { return K_; }
    std::span<const double> S_all() const { return S_; }
    std::span<const double> A_all() const { return A_; }

private:
    CellGrid grid_;
    size_t k_stride_ = 0, s_stride_ = 0, a_stride_ = 0;
    std::vector<double> K_, S_, A_;
};

enum class InclusionShape { Ball, Box, LaminateSlab };

struct InclusionSpec {
    InclusionShape shape = InclusionShape::Ball;
    std::vector<double> center;      // d entries
    double radius = 0.0;             // ball radius, or slab half-width
    std::vector<double> half_widths; // box half-widths (d entries)
    int slab_axis = 0;               // slab normal axis
    double smoothing_width = 0.0;    // half-cosine transition width, 0 = sharp
};

/// Signed distance to the inclusion boundary, negative inside.
double signed_distance(const InclusionSpec &inc, std::span<const double> y);

CoefficientField constant_field(const CellGrid &grid, const Material &m);

/// phase1 inside the inclusion, phase2 outside.
CoefficientField two_phase(const CellGrid &grid, const InclusionSpec &inc, const Material &phase1,
                           const Material &phase2);

/// phase1 where y_axis + 1/2 < fraction, phase2 elsewhere.
CoefficientField laminate(const CellGrid &grid, int axis, double fraction, const Material &phase1,
                          const Material &phase2);

/// S(y) = amplitude * sin(2 pi pitch y_1) * P, with P a fixed unit-Frobenius pattern
/// (P_{ij}^{klm} = delta_ik delta_jl delta_m1 / d). S(-y) = -S(y) exactly on the grid.
Tensor5Field chiral_S(const CellGrid &grid, double amplitude, double pitch);

/// The unit pattern used by chiral_S.
Tensor5 chiral_pattern(int d);

struct InversionSplit {
    double odd_norm = 0.0;
    double even_norm = 0.0;
};

/// Discrete L2 norms of the odd and even parts of S under y -> -y.
InversionSplit inversion_defect(const Tensor5Field &field);

} // namespace gradhom
