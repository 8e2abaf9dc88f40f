#include "gcur/ou_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gcur {

SpectralField neumann_map(std::span<const double> flux, int nx, int nz) {
    if (!flux.empty() && flux[0] != 0.0)
        throw std::invalid_argument(
            "neumann_map: flux has a nonzero mean (k = 0) component; no zero-mean solution");
    SpectralField h = SpectralField::neumann(nx, nz);
    const int kmax = std::min<int>(nz - 1, int(flux.size()) - 1);
    for (int k = 1; k <= kmax; ++k) {
        if (flux[k] == 0.0) continue;
        for (int m = 0; m < nx; ++m) {
            const double mu = (double(m) * m + double(k) * k) * kPi * kPi;
            h.coef(m, k) = -boundary_coupling(m) * flux[k] / mu;
        }
    }
    return h;
}

OuTransition::OuTransition(int nx, int nz, double dt, CovarianceSpec cov)
    : nx_(nx), nz_(nz), dt_(dt), cov_(std::move(cov)) {
    if (!(dt > 0.0)) throw std::invalid_argument("OuTransition: dt must be > 0");
    cov_.validate();
    decay_.assign(size_t(nx) * nz, 1.0);
    det_.assign(size_t(nx) * nz, 0.0);
    noise_amp_.assign(size_t(nx) * nz, 0.0);
    const int K = std::min(cov_.K(), nz - 1);
    for (int m = 0; m < nx; ++m) {
        for (int k = 0; k < nz; ++k) {
            if (m == 0 && k == 0) continue;  // zero-mean slot never evolves
            const double mu = (double(m) * m + double(k) * k) * kPi * kPi;
            const double e = std::exp(-mu * dt);
            const size_t idx = size_t(m) * nz + k;
            decay_[idx] = e;
            if (k >= 1 && k <= K) {
                const double fk = (k - 1 < int(cov_.f.size())) ? cov_.f[k - 1] : 0.0;
                const double gm = boundary_coupling(m);
                det_[idx] = -gm * fk * (1.0 - e) / mu;
                noise_amp_[idx] =
                    -gm * std::sqrt(cov_.q[k - 1]) * std::sqrt((1.0 - e * e) / (2.0 * mu * dt));
            }
        }
    }
}

OuState OuTransition::step(const OuState& state, const NoisePath& path,
                           int64_t step_index) const {
    if (state.eta1.nx() != nx_ || state.eta1.nz() != nz_)
        throw std::invalid_argument("OuTransition: state layout mismatch");
    OuState out{state.eta1, state.t + dt_};
    const int K = std::min(cov_.K(), nz_ - 1);
    // Fetch the shared increments once per z-mode.
    for (int m = 0; m < nx_; ++m) {
        for (int k = 0; k < nz_; ++k) {
            const size_t idx = size_t(m) * nz_ + k;
            double a = state.eta1.coef(m, k) * decay_[idx] + det_[idx];
            if (k >= 1 && k <= K && noise_amp_[idx] != 0.0)
                a += noise_amp_[idx] * path.increment(step_index, k);
            out.eta1.coef(m, k) = a;
        }
    }
    out.eta1.enforce_zero_mean();
    return out;
}

OuState ou_exact_step(const OuState& state, const CovarianceSpec& cov, const NoisePath& path,
                      int64_t step_index, double dt) {
    OuTransition tr(state.eta1.nx(), state.eta1.nz(), dt, cov);
    return tr.step(state, path, step_index);
}

OuStationaryStats stationary_stats(const CovarianceSpec& cov, int nx, int nz) {
    cov.validate();
    std::vector<double> flux(size_t(std::min(cov.K(), nz - 1)) + 1, 0.0);
    for (int k = 1; k < int(flux.size()); ++k)
        flux[k] = (k - 1 < int(cov.f.size())) ? cov.f[k - 1] : 0.0;

    OuStationaryStats st{neumann_map(flux, nx, nz), std::vector<double>(size_t(nx) * nz, 0.0),
                         0.0};
    const int K = std::min(cov.K(), nz - 1);
    double var_total = 0.0;
    for (int m = 0; m < nx; ++m) {
        for (int k = 1; k <= K; ++k) {
            const double mu = (double(m) * m + double(k) * k) * kPi * kPi;
            const double gm = boundary_coupling(m);
            const double v = gm * gm * cov.q[k - 1] / (2.0 * mu);
            st.variances[size_t(m) * nz + k] = v;
            var_total += v;
        }
    }
    st.expected_norm_sq = st.mean_field.l2_norm_sq() + var_total;
    return st;
}

OuState ou_stationary_draw(const CovarianceSpec& cov, int nx, int nz, uint64_t seed,
                           uint32_t replicate, double t) {
    OuStationaryStats st = stationary_stats(cov, nx, nz);
    OuState out{st.mean_field, t};
    constexpr uint32_t kOuInitStream = 0x50000000u;
    for (int m = 0; m < nx; ++m) {
        for (int k = 0; k < nz; ++k) {
            const double v = st.variances[size_t(m) * nz + k];
            if (v <= 0.0) continue;
            const uint32_t stream = kOuInitStream + uint32_t(m) * uint32_t(nz) + uint32_t(k);
            out.eta1.coef(m, k) += std::sqrt(v) * rng::standard_normal(seed, replicate, stream, 0);
        }
    }
    out.eta1.enforce_zero_mean();
    return out;
}

double dissipativity_margin(const PhysicalParams& params, const CovarianceSpec& cov,
                            const PoincareConstants& pc, int nx, int nz) {
    params.validate();
    if (params.Ra == 0.0) return std::numeric_limits<double>::infinity();
    const double e2 = stationary_stats(cov, nx, nz).expected_norm_sq;
    const double l2 = pc.lambda2, l1 = pc.lambda1;
    return 1.0 / (params.Ra * params.Ra * l2 * l2) - 2.0 * l1 * l1 * e2;
}

double lyapunov_decay_rate(const PhysicalParams& params, double margin,
                           const PoincareConstants& pc) {
    const double half_vq = pc.lambda2 * pc.lambda2 / 2.0;
    if (params.Ra == 0.0 || std::isinf(margin)) return half_vq;
    return std::min(half_vq,
                    margin * pc.lambda1 * pc.lambda1 * params.Ra * params.Ra * pc.lambda2 *
                        pc.lambda2);
}

AbsorbingRadius absorbing_radius(const CovarianceSpec& cov, const NoisePath& path, double alpha,
                                 double window, int nx, int nz, double lambda2, double warmup) {
    if (!(alpha > 0.0)) throw std::invalid_argument("absorbing_radius: alpha must be > 0");
    if (!(window > 0.0)) throw std::invalid_argument("absorbing_radius: window must be > 0");
    const double dt = path.dt();
    const int64_t n_win = int64_t(std::llround(window / dt));
    const int64_t n_warm = int64_t(std::llround(warmup / dt));
    if (std::abs(n_win * dt - window) > 1e-9)
        throw std::invalid_argument("absorbing_radius: window must be a multiple of dt");

    // Need increments on [-window - warmup, 0).
    NoisePath p = path.with_window(-double(n_win + n_warm) * dt, n_win + n_warm);
    OuTransition tr(nx, nz, dt, cov);
    OuState eta{neumann_map([&] {
                    std::vector<double> f(cov.f.size() + 1, 0.0);
                    for (size_t i = 0; i < cov.f.size(); ++i) f[i + 1] = cov.f[i];
                    return f;
                }(), nx, nz),
                -double(n_win + n_warm) * dt};
    for (int64_t s = 0; s < n_warm; ++s) eta = tr.step(eta, p, s);

    // Trapezoid in tau over [-T, 0] of e^{alpha tau} ||eta1||^2.
    double integral = 0.0, sup = 0.0;
    double prev = std::exp(-alpha * window) * eta.eta1.l2_norm_sq();
    sup = eta.eta1.l2_norm_sq();
    for (int64_t s = 0; s < n_win; ++s) {
        eta = tr.step(eta, p, n_warm + s);
        const double n2 = eta.eta1.l2_norm_sq();
        sup = std::max(sup, n2);
        const double tau = -double(n_win - 1 - s) * dt;
        const double cur = std::exp(alpha * tau) * n2;
        integral += 0.5 * (prev + cur) * dt;
        prev = cur;
    }
    AbsorbingRadius r;
    r.radius = 2.0 * integral / (lambda2 * lambda2);
    r.tail_bound = 2.0 * std::exp(-alpha * window) * sup / (alpha * lambda2 * lambda2);
    return r;
}

} // namespace gcur
