#include "gradhom/effective.hpp"

#include "gradhom/errors.hpp"

#include <random>

namespace gradhom {

Tensor4 assemble_K_eff(const CoefficientField &field, const CorrectorHS1 &corr) {
    const int d = field.dim();
    if (!(corr.grid == field.grid()) || corr.d != d || corr.phi.size() != static_cast<size_t>(d * d))
        throw DimensionMismatch("HS1 correctors missing or on a different grid");
    const size_t nn = field.grid().num_nodes();
    const int n2 = d * d;
    SpectralOps ops(field.grid());
    Tensor4 out(d);
    auto flat = out.data();
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            const auto G = ops.gradient(corr.at(a, b));
            const int col = a * d + b;
            for (int I = 0; I < n2; ++I) {
                double s = 0.0;
                for (size_t node = 0; node < nn; ++node) {
                    auto K = field.K_data(node);
                    double v = K[I * n2 + col];
                    for (int J = 0; J < n2; ++J)
                        v += K[I * n2 + J] * G.data[J * nn + node];
                    s += v;
                }
                flat[I * n2 + col] = s / static_cast<double>(nn);
            }
        }
    return out;
}

namespace {
template <typename T>
T node_average(const CoefficientField &field, std::span<const double> all) {
    T out(field.dim());
    auto flat = out.data();
    const size_t stride = flat.size();
    const size_t nn = field.grid().num_nodes();
    for (size_t node = 0; node < nn; ++node)
        for (size_t e = 0; e < stride; ++e)
            flat[e] += all[node * stride + e];
    for (double &v : flat)
        v /= static_cast<double>(nn);
    return out;
}
} // namespace

Tensor4 assemble_K_mean(const CoefficientField &field) {
    return node_average<Tensor4>(field, field.K_all());
}

Tensor6 assemble_A_mean(const CoefficientField &field) {
    return node_average<Tensor6>(field, field.A_all());
}

Tensor6 assemble_A_eff(const CoefficientField &field, const CorrectorHS2 &corr) {
    const int d = field.dim();
    const int n3 = d * d * d;
    if (!(corr.grid == field.grid()) || corr.d != d || corr.w.size() != static_cast<size_t>(n3))
        throw DimensionMismatch("HS2 correctors missing or on a different grid");
    const size_t nn = field.grid().num_nodes();
    SpectralOps ops(field.grid());
    Tensor6 out(d);
    auto flat = out.data();
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c) {
                const auto Q = ops.hessian(corr.at(a, b, c));
                const int col = (a * d + b) * d + c;
                for (int I = 0; I < n3; ++I) {
                    double s = 0.0;
                    for (size_t node = 0; node < nn; ++node) {
                        auto A = field.A_data(node);
                        double v = A[I * n3 + col];
                        for (int J = 0; J < n3; ++J)
                            v += A[I * n3 + J] * Q.data[J * nn + node];
                        s += v;
                    }
                    flat[I * n3 + col] = s / static_cast<double>(nn);
                }
            }
    return out;
}

double voigt_margin(const Matrix &upper, const Matrix &lower, int samples, std::uint64_t seed) {
    const Matrix diff = upper - lower;
    const Matrix sym = 0.5 * (diff + diff.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    double margin = es.eigenvalues().minCoeff();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = diff.rows();
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd x(n);
        for (Eigen::Index i = 0; i < n; ++i)
            x(i) = normal(rng);
        x.normalize();
        margin = std::min(margin, x.dot(diff * x));
    }
    return margin;
}

EffectiveDiagnostics verify_effective(EffectiveTensors &eff, const CoefficientField &field,
                                      int samples, std::uint64_t seed) {
    EffectiveDiagnostics dg;
    dg.samples = samples;
    const auto [c1, k1] = field.min_ellipticity();
    dg.field_c1 = c1;
    dg.field_kappa1 = k1;
    if (eff.K_eff) {
        dg.has_K = true;
        dg.sym_defect_K = check_major_symmetry(*eff.K_eff);
        dg.min_eig_K = ellipticity_estimate(*eff.K_eff).min_eigenvalue;
        dg.voigt_margin_K = voigt_margin(flatten(eff.K_mean), flatten(*eff.K_eff), samples, seed);
    }
    if (eff.A_eff) {
        dg.has_A = true;
        dg.sym_defect_A = check_major_symmetry(*eff.A_eff);
        dg.min_eig_A = ellipticity_estimate(*eff.A_eff).min_eigenvalue;
        dg.voigt_margin_A = voigt_margin(flatten(eff.A_mean), flatten(*eff.A_eff), samples, seed + 1);
    }
    eff.diagnostics = dg;
    return dg;
}

} // namespace gradhom
