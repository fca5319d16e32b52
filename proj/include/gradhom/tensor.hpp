#pragma once

// Dense 4th/5th/6th-order material tensors in dimension d = 1, 2, 3.
//
// Storage is row-major in the index order used by the constitutive laws:
//   Tensor4  K_{ijkl}          sigma_ij += K_{ijkl} du_k/dx_l
//   Tensor5  S_{ij}^{klm}      sigma_ij += S_{ij}^{klm} d2u_k/dx_m dx_l
//                              mu_ijk   += S_{nl}^{ijk} du_n/dx_l
//   Tensor6  A^{ijk}_{nlp}     mu_ijk   += A^{ijk}_{nlp} d2u_n/dx_l dx_p
// Gradients are stored as G_{kl} = du_k/dx_l and Hessians as Q_{nlp} = d2u_n/dx_l dx_p.

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace gradhom {

inline int ipow(int base, int exp) {
    int r = 1;
    for (int i = 0; i < exp; ++i)
        r *= base;
    return r;
}

void check_dimension(int d);

/// Dense tensor of fixed order over {0..d-1}; entries stored contiguously.
template <int Order>
class DenseTensor {
public:
    static constexpr int order = Order;

    DenseTensor() = default;
    explicit DenseTensor(int d) : d_(d), data_(static_cast<size_t>(ipow(d, Order)), 0.0) {
        check_dimension(d);
    }
    DenseTensor(int d, std::vector<double> data);

    int dim() const { return d_; }
    size_t size() const { return data_.size(); }
    std::span<const double> data() const { return data_; }
    std::span<double> data() {
        major_symmetric_ = false;
        return data_;
    }

    template <typename... I>
    double &operator()(I... idx) {
        static_assert(sizeof...(I) == Order);
        major_symmetric_ = false;
        return data_[flat(idx...)];
    }
    template <typename... I>
    double operator()(I... idx) const {
        static_assert(sizeof...(I) == Order);
        return data_[flat(idx...)];
    }

    /// Frobenius norm.
    double norm() const;
    bool all_finite() const;

    DenseTensor &operator+=(const DenseTensor &o);
    DenseTensor &operator*=(double s);
    friend DenseTensor operator+(DenseTensor a, const DenseTensor &b) { return a += b; }
    friend DenseTensor operator*(double s, DenseTensor a) { return a *= s; }

    bool major_symmetric() const { return major_symmetric_; }
    /// Sets the flag after verifying exact symmetry of the stored entries (orders 4 and 6 only).
    void flag_major_symmetric();

private:
    template <typename... I>
    size_t flat(I... idx) const {
        size_t f = 0;
        ((f = f * static_cast<size_t>(d_) + static_cast<size_t>(idx)), ...);
        return f;
    }

    int d_ = 0;
    std::vector<double> data_;
    bool major_symmetric_ = false;
};

using Tensor3 = DenseTensor<3>;
using Tensor4 = DenseTensor<4>;
using Tensor5 = DenseTensor<5>;
using Tensor6 = DenseTensor<6>;
using Matrix = Eigen::MatrixXd;

struct EllipticityEstimate {
    double min_eigenvalue = 0.0; // c1 / kappa1
    double max_eigenvalue = 0.0; // c2 / kappa2 reported as 1 / max_eigenvalue
    bool is_elliptic = false;
    bool symmetrized = false;    // true when the input was not major-symmetric
};

Tensor4 make_isotropic_K(double lambda, double mu, int d);
/// K_{ijkl} = c delta_ik delta_jl, the tensor acting as c times identity on matrices.
Tensor4 make_identity_K(double c, int d);
Tensor6 make_diagonal_A(double eta, int d);

/// max |t_IJ - t_JI| over the flattened pairing I = (ij) or (ijk).
double check_major_symmetry(const Tensor4 &t);
double check_major_symmetry(const Tensor6 &t);

/// d^2 x d^2 (resp. d^3 x d^3) matrix of the quadratic form, acting on all matrices (3-tensors).
Matrix flatten(const Tensor4 &t);
Matrix flatten(const Tensor6 &t);

EllipticityEstimate ellipticity_estimate(const Tensor4 &t);
EllipticityEstimate ellipticity_estimate(const Tensor6 &t);

/// (KM)_{ij} = K_{ijkl} M_{kl}
Matrix contract_K(const Tensor4 &K, const Matrix &M);
/// (AQ)_{ijk} = A^{ijk}_{nlp} Q_{nlp}
Tensor3 contract_A(const Tensor6 &A, const Tensor3 &Q);
/// mu-part: out_{ijk} = S_{nl}^{ijk} G_{nl}
Tensor3 contract_S_grad(const Tensor5 &S, const Matrix &G);
/// sigma-part: out_{ij} = S_{ij}^{klm} Q_{kml}
Matrix contract_S_hess(const Tensor5 &S, const Tensor3 &Q);

/// Raw-span kernels shared with the grid solvers (no allocation, no checks).
namespace kernel {
void contract4(int d, const double *K, const double *M, double *out);
void contract6(int d, const double *A, const double *Q, double *out);
} // namespace kernel

} // namespace gradhom
