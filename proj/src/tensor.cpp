#include "gradhom/tensor.hpp"

#include "gradhom/errors.hpp"

#include <cmath>
#include <string>

namespace gradhom {

void check_dimension(int d) {
    if (d < 1 || d > 3)
        throw DimensionMismatch("spatial dimension must be 1, 2 or 3, got " + std::to_string(d));
}

template <int Order>
DenseTensor<Order>::DenseTensor(int d, std::vector<double> data) : d_(d), data_(std::move(data)) {
    check_dimension(d);
    if (data_.size() != static_cast<size_t>(ipow(d, Order)))
        throw DimensionMismatch("tensor of order " + std::to_string(Order) + " in d=" +
                                std::to_string(d) + " needs " + std::to_string(ipow(d, Order)) +
                                " entries, got " + std::to_string(data_.size()));
}

template <int Order>
double DenseTensor<Order>::norm() const {
    double s = 0.0;
    for (double v : data_)
        s += v * v;
    return std::sqrt(s);
}

template <int Order>
bool DenseTensor<Order>::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v))
            return false;
    return true;
}

template <int Order>
DenseTensor<Order> &DenseTensor<Order>::operator+=(const DenseTensor &o) {
    if (o.d_ != d_)
        throw DimensionMismatch("tensor sum with mismatched dimensions");
    for (size_t i = 0; i < data_.size(); ++i)
        data_[i] += o.data_[i];
    major_symmetric_ = major_symmetric_ && o.major_symmetric_;
    return *this;
}

template <int Order>
DenseTensor<Order> &DenseTensor<Order>::operator*=(double s) {
    for (double &v : data_)
        v *= s;
    return *this;
}

namespace {

// max |t_IJ - t_JI| for the square flattening with half-order block size n.
double pairing_defect(std::span<const double> t, int n) {
    double defect = 0.0;
    for (int I = 0; I < n; ++I)
        for (int J = I + 1; J < n; ++J)
            defect = std::max(defect, std::abs(t[I * n + J] - t[J * n + I]));
    return defect;
}

Matrix flatten_square(std::span<const double> t, int n) {
    Matrix m(n, n);
    for (int I = 0; I < n; ++I)
        for (int J = 0; J < n; ++J)
            m(I, J) = t[I * n + J];
    return m;
}

EllipticityEstimate estimate_from_flat(Matrix m, bool symmetric) {
    if (!m.allFinite())
        throw NumericError("ellipticity_estimate: non-finite tensor entries");
    EllipticityEstimate e;
    e.symmetrized = !symmetric;
    if (!symmetric)
        m = 0.5 * (m + m.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    e.min_eigenvalue = es.eigenvalues().minCoeff();
    e.max_eigenvalue = es.eigenvalues().maxCoeff();
    e.is_elliptic = e.min_eigenvalue > 0.0;
    return e;
}

} // namespace

template <int Order>
void DenseTensor<Order>::flag_major_symmetric() {
    if constexpr (Order == 4 || Order == 6) {
        const int n = ipow(d_, Order / 2);
        if (pairing_defect(data_, n) != 0.0)
            throw InvalidMaterial("tensor flagged major-symmetric is not symmetric as stored");
        major_symmetric_ = true;
    } else {
        throw DimensionMismatch("major symmetry is defined for orders 4 and 6 only");
    }
}

template class DenseTensor<3>;
template class DenseTensor<4>;
template class DenseTensor<5>;
template class DenseTensor<6>;

Tensor4 make_isotropic_K(double lambda, double mu, int d) {
    if (!(mu > 0.0))
        throw InvalidMaterial("isotropic K needs mu > 0, got mu = " + std::to_string(mu));
    if (!(d * lambda + 2.0 * mu > 0.0))
        throw InvalidMaterial("isotropic K needs d*lambda + 2*mu > 0");
    Tensor4 K(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    K(i, j, k, l) = lambda * (i == j) * (k == l) +
                                    mu * ((i == k) * (j == l) + (i == l) * (j == k));
    K.flag_major_symmetric();
    return K;
}

Tensor4 make_identity_K(double c, int d) {
    if (!(c > 0.0))
        throw InvalidMaterial("identity-action K needs c > 0");
    Tensor4 K(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            K(i, j, i, j) = c;
    K.flag_major_symmetric();
    return K;
}

Tensor6 make_diagonal_A(double eta, int d) {
    if (!(eta > 0.0))
        throw InvalidMaterial("diagonal A needs eta > 0, got eta = " + std::to_string(eta));
    Tensor6 A(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                A(i, j, k, i, j, k) = eta;
    A.flag_major_symmetric();
    return A;
}

double check_major_symmetry(const Tensor4 &t) { return pairing_defect(t.data(), t.dim() * t.dim()); }
double check_major_symmetry(const Tensor6 &t) { return pairing_defect(t.data(), ipow(t.dim(), 3)); }

Matrix flatten(const Tensor4 &t) { return flatten_square(t.data(), t.dim() * t.dim()); }
Matrix flatten(const Tensor6 &t) { return flatten_square(t.data(), ipow(t.dim(), 3)); }

namespace {
constexpr double kSymmetryTol = 1e-12;

double relative_defect(double defect, double norm) { return norm > 0.0 ? defect / norm : defect; }
} // namespace

EllipticityEstimate ellipticity_estimate(const Tensor4 &t) {
    if (!t.all_finite())
        throw NumericError("ellipticity_estimate: non-finite tensor entries");
    const bool sym = relative_defect(check_major_symmetry(t), t.norm()) <= kSymmetryTol;
    return estimate_from_flat(flatten(t), sym);
}

EllipticityEstimate ellipticity_estimate(const Tensor6 &t) {
    if (!t.all_finite())
        throw NumericError("ellipticity_estimate: non-finite tensor entries");
    const bool sym = relative_defect(check_major_symmetry(t), t.norm()) <= kSymmetryTol;
    return estimate_from_flat(flatten(t), sym);
}

namespace kernel {

void contract4(int d, const double *K, const double *M, double *out) {
    const int n = d * d;
    for (int I = 0; I < n; ++I) {
        double s = 0.0;
        const double *row = K + I * n;
        for (int J = 0; J < n; ++J)
            s += row[J] * M[J];
        out[I] = s;
    }
}

void contract6(int d, const double *A, const double *Q, double *out) {
    const int n = d * d * d;
    for (int I = 0; I < n; ++I) {
        double s = 0.0;
        const double *row = A + I * n;
        for (int J = 0; J < n; ++J)
            s += row[J] * Q[J];
        out[I] = s;
    }
}

} // namespace kernel

Matrix contract_K(const Tensor4 &K, const Matrix &M) {
    const int d = K.dim();
    if (M.rows() != d || M.cols() != d)
        throw DimensionMismatch("contract_K: matrix must be d x d");
    Matrix out = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    out(i, j) += K(i, j, k, l) * M(k, l);
    return out;
}

Tensor3 contract_A(const Tensor6 &A, const Tensor3 &Q) {
    const int d = A.dim();
    if (Q.dim() != d)
        throw DimensionMismatch("contract_A: 3-tensor dimension mismatch");
    Tensor3 out(d);
    kernel::contract6(d, A.data().data(), Q.data().data(), out.data().data());
    return out;
}

Tensor3 contract_S_grad(const Tensor5 &S, const Matrix &G) {
    const int d = S.dim();
    if (G.rows() != d || G.cols() != d)
        throw DimensionMismatch("contract_S_grad: matrix must be d x d");
    Tensor3 out(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                double s = 0.0;
                for (int n = 0; n < d; ++n)
                    for (int l = 0; l < d; ++l)
                        s += S(n, l, i, j, k) * G(n, l);
                out(i, j, k) = s;
            }
    return out;
}

Matrix contract_S_hess(const Tensor5 &S, const Tensor3 &Q) {
    const int d = S.dim();
    if (Q.dim() != d)
        throw DimensionMismatch("contract_S_hess: 3-tensor dimension mismatch");
    Matrix out = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    for (int m = 0; m < d; ++m)
                        out(i, j) += S(i, j, k, l, m) * Q(k, m, l);
    return out;
}

} // namespace gradhom
