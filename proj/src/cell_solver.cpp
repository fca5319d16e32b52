#include "gradhom/cell_solver.hpp"

#include "gradhom/errors.hpp"
#include "gradhom/parallel.hpp"

#include <cmath>
#include <string>

namespace gradhom {

namespace {

void check_grid(const CoefficientField &field, const PeriodicVectorField &u) {
    if (!(u.grid == field.grid()) || u.components != field.dim())
        throw DimensionMismatch("vector field does not live on the coefficient field's grid");
}

void check_index(int v, int d) {
    if (v < 0 || v >= d)
        throw DimensionMismatch("corrector index " + std::to_string(v) + " out of range for d=" +
                                std::to_string(d));
}

// Pointwise contraction of a (ncomp-component) field with per-node square blocks.
PeriodicVectorField contract_field(const PeriodicVectorField &in, std::span<const double> blocks,
                                   int n) {
    const size_t nn = in.grid.num_nodes();
    PeriodicVectorField out(in.grid, n);
    std::vector<double> loc(n), res(n);
    const size_t stride = static_cast<size_t>(n) * n;
    for (size_t node = 0; node < nn; ++node) {
        for (int c = 0; c < n; ++c)
            loc[c] = in.data[c * nn + node];
        const double *blk = blocks.data() + node * stride;
        for (int I = 0; I < n; ++I) {
            double s = 0.0;
            for (int J = 0; J < n; ++J)
                s += blk[I * n + J] * loc[J];
            res[I] = s;
        }
        for (int c = 0; c < n; ++c)
            out.data[c * nn + node] = res[c];
    }
    return out;
}

// Constant unit gradient e_a x e_b applied by K, as a field.
PeriodicVectorField load_stress(const CoefficientField &field, int a, int b) {
    const int d = field.dim();
    const size_t nn = field.grid().num_nodes();
    PeriodicVectorField s(field.grid(), d * d);
    for (size_t node = 0; node < nn; ++node) {
        auto K = field.K_data(node);
        for (int I = 0; I < d * d; ++I)
            s.data[I * nn + node] = K[I * d * d + (a * d + b)];
    }
    return s;
}

PeriodicVectorField load_hyperstress(const CoefficientField &field, int a, int b, int c) {
    const int d = field.dim();
    const int n3 = d * d * d;
    const size_t nn = field.grid().num_nodes();
    PeriodicVectorField s(field.grid(), n3);
    for (size_t node = 0; node < nn; ++node) {
        auto A = field.A_data(node);
        for (int I = 0; I < n3; ++I)
            s.data[I * nn + node] = A[I * n3 + ((a * d + b) * d + c)];
    }
    return s;
}

double field_dot_raw(const PeriodicVectorField &a, const PeriodicVectorField &b) { return dot(a, b); }

void negate(PeriodicVectorField &f) {
    for (double &v : f.data)
        v = -v;
}

} // namespace

CellOperator::CellOperator(const CoefficientField &field, Regime regime)
    : field_(field), regime_(regime), ops_(field.grid()) {
    if (regime != Regime::HS1 && regime != Regime::HS2)
        throw UnsupportedRegime("cell problems exist for HS1 and HS2 only");
}

PeriodicVectorField CellOperator::stress(const PeriodicVectorField &G) const {
    const int d = field_.dim();
    return contract_field(G, field_.K_all(), d * d);
}

PeriodicVectorField CellOperator::hyperstress(const PeriodicVectorField &Q) const {
    const int d = field_.dim();
    return contract_field(Q, field_.A_all(), d * d * d);
}

PeriodicVectorField CellOperator::apply(const PeriodicVectorField &u) const {
    PeriodicVectorField r = ops_.hessian_adjoint(hyperstress(ops_.hessian(u)));
    if (regime_ == Regime::HS1) {
        const auto k = ops_.gradient_adjoint(stress(ops_.gradient(u)));
        for (size_t i = 0; i < r.data.size(); ++i)
            r.data[i] += k.data[i];
    }
    r.remove_mean();
    return r;
}

PeriodicVectorField CellOperator::rhs_hs1(int a, int b) const {
    auto r = ops_.gradient_adjoint(load_stress(field_, a, b));
    negate(r);
    r.remove_mean();
    return r;
}

PeriodicVectorField CellOperator::rhs_hs2(int a, int b, int c) const {
    auto r = ops_.hessian_adjoint(load_hyperstress(field_, a, b, c));
    negate(r);
    r.remove_mean();
    return r;
}

double apply_hs1_form(const CoefficientField &field, const PeriodicVectorField &phi,
                      const PeriodicVectorField &psi) {
    check_grid(field, phi);
    check_grid(field, psi);
    CellOperator op(field, Regime::HS1);
    const auto &ops = op.ops();
    const auto Gphi = ops.gradient(phi), Gpsi = ops.gradient(psi);
    const auto Qphi = ops.hessian(phi), Qpsi = ops.hessian(psi);
    return field_dot_raw(op.stress(Gphi), Gpsi) + field_dot_raw(op.hyperstress(Qphi), Qpsi);
}

double apply_hs2_form(const CoefficientField &field, const PeriodicVectorField &w,
                      const PeriodicVectorField &psi) {
    check_grid(field, w);
    check_grid(field, psi);
    CellOperator op(field, Regime::HS2);
    const auto &ops = op.ops();
    return field_dot_raw(op.hyperstress(ops.hessian(w)), ops.hessian(psi));
}

double hs1_rhs(const CoefficientField &field, int alpha, int beta, const PeriodicVectorField &psi) {
    check_grid(field, psi);
    check_index(alpha, field.dim());
    check_index(beta, field.dim());
    SpectralOps ops(field.grid());
    return -field_dot_raw(load_stress(field, alpha, beta), ops.gradient(psi));
}

double hs2_rhs(const CoefficientField &field, int alpha, int beta, int gamma,
               const PeriodicVectorField &psi) {
    check_grid(field, psi);
    check_index(alpha, field.dim());
    check_index(beta, field.dim());
    check_index(gamma, field.dim());
    SpectralOps ops(field.grid());
    return -field_dot_raw(load_hyperstress(field, alpha, beta, gamma), ops.hessian(psi));
}

std::pair<double, double> default_reference_medium(const CoefficientField &field) {
    const size_t nn = field.grid().num_nodes();
    double ck = 0.0, ca = 0.0, ck_max = 0.0, ca_max = 0.0;
    for (size_t n = 0; n < nn; ++n) {
        const auto ek = ellipticity_estimate(field.K_at(n));
        const auto ea = ellipticity_estimate(field.A_at(n));
        ck += ek.min_eigenvalue;
        ca += ea.min_eigenvalue;
        ck_max += ek.max_eigenvalue;
        ca_max += ea.max_eigenvalue;
    }
    ck /= nn;
    ca /= nn;
    // fall back to the spectral radius when a tensor is only semi-definite
    if (!(ck > 0.0))
        ck = ck_max / nn;
    if (!(ca > 0.0))
        ca = ca_max / nn;
    return {ck, ca};
}

namespace {

PeriodicVectorField precondition(const SpectralOps &ops, const PeriodicVectorField &r, double c_ref,
                                 double a_ref, bool with_gradient) {
    const size_t nn = r.grid.num_nodes();
    PeriodicVectorField z(r.grid, r.components);
    std::vector<cplx> h(nn);
    for (int c = 0; c < r.components; ++c) {
        ops.forward(r.component(c), h);
        h[0] = 0.0;
        for (size_t m = 1; m < nn; ++m) {
            const double sym = (with_gradient ? c_ref * ops.sym2(m) : 0.0) + a_ref * ops.sym4(m);
            h[m] /= sym;
        }
        ops.inverse(h, z.component(c));
    }
    return z;
}

PeriodicVectorField conjugate_gradient(const CellOperator &op, const PeriodicVectorField &b,
                                       double load_scale, const SolverParams &params,
                                       SolveStats *stats) {
    if (!(params.rel_tol > 0.0))
        throw ConfigError("rel_tol must be positive");
    double c_ref = params.c_ref, a_ref = params.a_ref;
    if (!(c_ref > 0.0) || !(a_ref > 0.0)) {
        const auto [c_def, a_def] = default_reference_medium(op.field());
        c_ref = c_ref > 0.0 ? c_ref : c_def;
        a_ref = a_ref > 0.0 ? a_ref : a_def;
    }
    const bool hs1 = op.regime() == Regime::HS1;

    SolveStats local;
    SolveStats &st = stats ? *stats : local;
    st = SolveStats{};

    PeriodicVectorField x(b.grid, b.components);
    const double bnorm = b.l2_norm();
    // a load at rounding level (constant coefficients) has the zero corrector
    if (bnorm <= 1e-12 * std::max(load_scale, 1e-300)) {
        st.residual = 0.0;
        return x;
    }

    PeriodicVectorField r = b;
    PeriodicVectorField z = precondition(op.ops(), r, c_ref, a_ref, hs1);
    PeriodicVectorField p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= params.max_iter; ++it) {
        const PeriodicVectorField q = op.apply(p);
        const double pq = dot(p, q);
        if (!(pq > 0.0))
            throw SolverError("cell operator not positive on the search direction", st.history);
        const double alpha = rz / pq;
        for (size_t i = 0; i < x.data.size(); ++i) {
            x.data[i] += alpha * p.data[i];
            r.data[i] -= alpha * q.data[i];
        }
        const double res = r.l2_norm() / bnorm;
        st.history.push_back(res);
        st.iterations = it;
        if (res <= params.rel_tol)
            break;
        z = precondition(op.ops(), r, c_ref, a_ref, hs1);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (size_t i = 0; i < p.data.size(); ++i)
            p.data[i] = z.data[i] + beta * p.data[i];
    }
    x.remove_mean();

    // report the true residual, not the recursively updated one
    PeriodicVectorField tr = op.apply(x);
    for (size_t i = 0; i < tr.data.size(); ++i)
        tr.data[i] = b.data[i] - tr.data[i];
    st.residual = tr.l2_norm() / bnorm;
    if (st.residual > params.rel_tol * 10.0 &&
        (st.history.empty() || st.history.back() > params.rel_tol))
        throw SolverError("CG did not converge in " + std::to_string(params.max_iter) +
                              " iterations (relative residual " + std::to_string(st.residual) + ")",
                          st.history);
    return x;
}

} // namespace

PeriodicVectorField solve_corrector_hs1(const CoefficientField &field, int alpha, int beta,
                                        const SolverParams &params, SolveStats *stats) {
    check_index(alpha, field.dim());
    check_index(beta, field.dim());
    CellOperator op(field, Regime::HS1);
    const auto b = op.rhs_hs1(alpha, beta);
    return conjugate_gradient(op, b, load_stress(field, alpha, beta).l2_norm(), params, stats);
}

PeriodicVectorField solve_corrector_hs2(const CoefficientField &field, int alpha, int beta, int gamma,
                                        const SolverParams &params, SolveStats *stats) {
    check_index(alpha, field.dim());
    check_index(beta, field.dim());
    check_index(gamma, field.dim());
    CellOperator op(field, Regime::HS2);
    const auto b = op.rhs_hs2(alpha, beta, gamma);
    return conjugate_gradient(op, b, load_hyperstress(field, alpha, beta, gamma).l2_norm(), params,
                              stats);
}

CorrectorHS1 solve_all_hs1(const CoefficientField &field, const SolverParams &params) {
    const int d = field.dim();
    CorrectorHS1 out{field.grid(), d, std::vector<PeriodicVectorField>(d * d),
                     std::vector<SolveStats>(d * d)};
    SolverParams p = params;
    if (!(p.c_ref > 0.0) || !(p.a_ref > 0.0)) {
        auto [c, a] = default_reference_medium(field);
        if (!(p.c_ref > 0.0))
            p.c_ref = c;
        if (!(p.a_ref > 0.0))
            p.a_ref = a;
    }
    parallel_for(static_cast<size_t>(d * d), params.threads, [&](size_t i) {
        const int a = static_cast<int>(i) / d, b = static_cast<int>(i) % d;
        out.phi[i] = solve_corrector_hs1(field, a, b, p, &out.stats[i]);
    });
    return out;
}

CorrectorHS2 solve_all_hs2(const CoefficientField &field, const SolverParams &params) {
    const int d = field.dim();
    const size_t n = static_cast<size_t>(d * d * d);
    CorrectorHS2 out{field.grid(), d, std::vector<PeriodicVectorField>(n), std::vector<SolveStats>(n)};
    SolverParams p = params;
    if (!(p.a_ref > 0.0))
        p.a_ref = default_reference_medium(field).second;
    if (!(p.c_ref > 0.0))
        p.c_ref = 1.0; // unused by the HS2 operator
    parallel_for(n, params.threads, [&](size_t i) {
        const int a = static_cast<int>(i) / (d * d), b = (static_cast<int>(i) / d) % d,
                  c = static_cast<int>(i) % d;
        out.w[i] = solve_corrector_hs2(field, a, b, c, p, &out.stats[i]);
    });
    return out;
}

namespace {
double relative_residual(const CellOperator &op, const PeriodicVectorField &b,
                         const PeriodicVectorField &u) {
    auto r = op.apply(u);
    for (size_t i = 0; i < r.data.size(); ++i)
        r.data[i] = b.data[i] - r.data[i];
    const double bn = b.l2_norm();
    return bn > 0.0 ? r.l2_norm() / bn : r.l2_norm();
}
} // namespace

double residual_hs1(const CoefficientField &field, const PeriodicVectorField &phi, int alpha, int beta) {
    check_grid(field, phi);
    CellOperator op(field, Regime::HS1);
    return relative_residual(op, op.rhs_hs1(alpha, beta), phi);
}

double residual_hs2(const CoefficientField &field, const PeriodicVectorField &w, int alpha, int beta,
                    int gamma) {
    check_grid(field, w);
    CellOperator op(field, Regime::HS2);
    return relative_residual(op, op.rhs_hs2(alpha, beta, gamma), w);
}

double residual(const CoefficientField &field, const CorrectorHS1 &corr) {
    double worst = 0.0;
    for (int a = 0; a < corr.d; ++a)
        for (int b = 0; b < corr.d; ++b) {
            const auto load = load_stress(field, a, b).l2_norm();
            CellOperator op(field, Regime::HS1);
            const auto rhs = op.rhs_hs1(a, b);
            if (rhs.l2_norm() <= 1e-12 * load)
                continue; // zero load, zero corrector
            worst = std::max(worst, relative_residual(op, rhs, corr.at(a, b)));
        }
    return worst;
}

double residual(const CoefficientField &field, const CorrectorHS2 &corr) {
    double worst = 0.0;
    for (int a = 0; a < corr.d; ++a)
        for (int b = 0; b < corr.d; ++b)
            for (int c = 0; c < corr.d; ++c) {
                const auto load = load_hyperstress(field, a, b, c).l2_norm();
                CellOperator op(field, Regime::HS2);
                const auto rhs = op.rhs_hs2(a, b, c);
                if (rhs.l2_norm() <= 1e-12 * load)
                    continue;
                worst = std::max(worst, relative_residual(op, rhs, corr.at(a, b, c)));
            }
    return worst;
}

} // namespace gradhom
