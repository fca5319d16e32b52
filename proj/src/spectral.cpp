#include "gradhom/spectral.hpp"

#include "gradhom/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace gradhom {

namespace {
// The FFTW planner is not thread-safe; execution of an existing plan on new arrays is.
std::mutex &planner_mutex() {
    static std::mutex m;
    return m;
}

int signed_mode(int k, int N) { return k < N / 2 ? k : k - N; }
} // namespace

double PeriodicVectorField::mean(int c) const {
    double s = 0.0;
    for (double v : component(c))
        s += v;
    return s / static_cast<double>(grid.num_nodes());
}

double PeriodicVectorField::l2_norm() const {
    double s = 0.0;
    for (double v : data)
        s += v * v;
    return std::sqrt(s / static_cast<double>(grid.num_nodes()));
}

void PeriodicVectorField::remove_mean() {
    for (int c = 0; c < components; ++c) {
        const double m = mean(c);
        for (double &v : component(c))
            v -= m;
    }
}

double dot(const PeriodicVectorField &u, const PeriodicVectorField &v) {
    if (u.data.size() != v.data.size())
        throw DimensionMismatch("dot: field sizes differ");
    double s = 0.0;
    for (size_t i = 0; i < u.data.size(); ++i)
        s += u.data[i] * v.data[i];
    return s / static_cast<double>(u.grid.num_nodes());
}

struct SpectralOps::Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

SpectralOps::SpectralOps(const CellGrid &grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
    const int d = grid.dim();
    const int N = grid.n();
    const size_t nn = grid.num_nodes();
    int dims[3] = {N, N, N};
    {
        std::lock_guard lock(planner_mutex());
        auto *a = fftw_alloc_complex(nn);
        auto *b = fftw_alloc_complex(nn);
        plans_->fwd = fftw_plan_dft(d, dims, a, b, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_->bwd = fftw_plan_dft(d, dims, a, b, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(a);
        fftw_free(b);
    }
    if (!plans_->fwd || !plans_->bwd)
        throw NumericError("FFTW planning failed");

    xi1_.assign(nn * 3, 0.0);
    xi_.assign(nn * 3, 0.0);
    sym2_.assign(nn, 0.0);
    sym4_.assign(nn, 0.0);
    const double two_pi = 2.0 * std::numbers::pi;
    for (size_t mode = 0; mode < nn; ++mode) {
        const auto k = grid.multi_index(mode);
        for (int a = 0; a < d; ++a) {
            const int m = signed_mode(k[a], N);
            xi_[mode * 3 + a] = two_pi * m;
            xi1_[mode * 3 + a] = (2 * k[a] == N) ? 0.0 : two_pi * m;
        }
        double s2 = 0.0, s4 = 0.0;
        for (int a = 0; a < d; ++a) {
            s2 += xi1_[mode * 3 + a] * xi1_[mode * 3 + a];
            for (int b = 0; b < d; ++b) {
                const double q = d2(mode, a, b);
                s4 += q * q;
            }
        }
        sym2_[mode] = s2;
        sym4_[mode] = s4;
    }
}

SpectralOps::~SpectralOps() {
    std::lock_guard lock(planner_mutex());
    if (plans_->fwd)
        fftw_destroy_plan(plans_->fwd);
    if (plans_->bwd)
        fftw_destroy_plan(plans_->bwd);
}

double SpectralOps::d2(size_t mode, int a, int b) const {
    if (a == b)
        return -xi_[mode * 3 + a] * xi_[mode * 3 + a];
    return -xi1_[mode * 3 + a] * xi1_[mode * 3 + b];
}

void SpectralOps::forward(std::span<const double> in, std::span<cplx> out) const {
    std::vector<cplx> tmp(in.begin(), in.end());
    fftw_execute_dft(plans_->fwd, reinterpret_cast<fftw_complex *>(tmp.data()),
                     reinterpret_cast<fftw_complex *>(out.data()));
}

void SpectralOps::inverse(std::span<const cplx> in, std::span<double> out) const {
    std::vector<cplx> src(in.begin(), in.end());
    std::vector<cplx> dst(in.size());
    fftw_execute_dft(plans_->bwd, reinterpret_cast<fftw_complex *>(src.data()),
                     reinterpret_cast<fftw_complex *>(dst.data()));
    const double scale = 1.0 / static_cast<double>(in.size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = dst[i].real() * scale;
}

PeriodicVectorField SpectralOps::gradient(const PeriodicVectorField &u) const {
    const int d = grid_.dim();
    const size_t nn = grid_.num_nodes();
    PeriodicVectorField G(grid_, d * d);
    std::vector<cplx> uh(nn), tmp(nn);
    for (int k = 0; k < u.components; ++k) {
        forward(u.component(k), uh);
        for (int l = 0; l < d; ++l) {
            for (size_t m = 0; m < nn; ++m)
                tmp[m] = d1(m, l) * uh[m];
            inverse(tmp, G.component(k * d + l));
        }
    }
    return G;
}

PeriodicVectorField SpectralOps::hessian(const PeriodicVectorField &u) const {
    const int d = grid_.dim();
    const size_t nn = grid_.num_nodes();
    PeriodicVectorField Q(grid_, d * d * d);
    std::vector<cplx> uh(nn), tmp(nn);
    for (int n = 0; n < u.components; ++n) {
        forward(u.component(n), uh);
        for (int l = 0; l < d; ++l)
            for (int p = 0; p < d; ++p) {
                for (size_t m = 0; m < nn; ++m)
                    tmp[m] = d2(m, l, p) * uh[m];
                inverse(tmp, Q.component((n * d + l) * d + p));
            }
    }
    return Q;
}

PeriodicVectorField SpectralOps::gradient_adjoint(const PeriodicVectorField &sigma) const {
    const int d = grid_.dim();
    const size_t nn = grid_.num_nodes();
    PeriodicVectorField r(grid_, d);
    std::vector<cplx> sh(nn), acc(nn);
    for (int k = 0; k < d; ++k) {
        std::fill(acc.begin(), acc.end(), cplx{});
        for (int l = 0; l < d; ++l) {
            forward(sigma.component(k * d + l), sh);
            for (size_t m = 0; m < nn; ++m)
                acc[m] += std::conj(d1(m, l)) * sh[m];
        }
        inverse(acc, r.component(k));
    }
    return r;
}

PeriodicVectorField SpectralOps::hessian_adjoint(const PeriodicVectorField &mu) const {
    const int d = grid_.dim();
    const size_t nn = grid_.num_nodes();
    PeriodicVectorField r(grid_, d);
    std::vector<cplx> sh(nn), acc(nn);
    for (int n = 0; n < d; ++n) {
        std::fill(acc.begin(), acc.end(), cplx{});
        for (int l = 0; l < d; ++l)
            for (int p = 0; p < d; ++p) {
                forward(mu.component((n * d + l) * d + p), sh);
                for (size_t m = 0; m < nn; ++m)
                    acc[m] += d2(m, l, p) * sh[m];
            }
        inverse(acc, r.component(n));
    }
    return r;
}

namespace {

// Fourier coefficients with respect to exp(2 pi i k.y), keyed by signed mode.
std::map<std::array<int, 3>, cplx> y_coefficients(const PeriodicVectorField &f, int c) {
    SpectralOps ops(f.grid);
    const size_t nn = f.grid.num_nodes();
    const int N = f.grid.n();
    const int d = f.grid.dim();
    std::vector<cplx> fh(nn);
    ops.forward(f.component(c), fh);
    std::map<std::array<int, 3>, cplx> out;
    for (size_t mode = 0; mode < nn; ++mode) {
        const auto k = f.grid.multi_index(mode);
        std::array<int, 3> key{0, 0, 0};
        cplx phase = 1.0 / static_cast<double>(nn);
        for (int a = 0; a < d; ++a) {
            key[a] = signed_mode(k[a], N);
            // node m sits at y = (m + 1/2)/N - 1/2
            phase *= std::polar(1.0, std::numbers::pi * key[a] * (1.0 - 1.0 / N));
        }
        out[key] = fh[mode] * phase;
    }
    return out;
}

} // namespace

double trig_l2_distance(const PeriodicVectorField &a, const PeriodicVectorField &b) {
    if (a.grid.dim() != b.grid.dim() || a.components != b.components)
        throw DimensionMismatch("trig_l2_distance: incompatible fields");
    double s = 0.0;
    for (int c = 0; c < a.components; ++c) {
        auto ca = y_coefficients(a, c);
        auto cb = y_coefficients(b, c);
        for (auto &[key, v] : ca) {
            auto it = cb.find(key);
            const cplx w = it == cb.end() ? cplx{} : it->second;
            s += std::norm(v - w);
        }
        for (auto &[key, w] : cb)
            if (!ca.count(key))
                s += std::norm(w);
    }
    return std::sqrt(s);
}

} // namespace gradhom
