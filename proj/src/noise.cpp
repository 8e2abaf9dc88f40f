#include "gcur/noise.hpp"

#include <cmath>

namespace gcur {

namespace {
constexpr double kPi_ = 3.14159265358979323846;
}

namespace rng {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(uint32_t c[4], uint32_t k0, uint32_t k1) {
    const uint64_t p0 = uint64_t(kMul0) * c[0];
    const uint64_t p1 = uint64_t(kMul1) * c[2];
    const uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
    const uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
    const uint32_t n0 = hi1 ^ c[1] ^ k0;
    const uint32_t n1 = lo1;
    const uint32_t n2 = hi0 ^ c[3] ^ k1;
    const uint32_t n3 = lo0;
    c[0] = n0;
    c[1] = n1;
    c[2] = n2;
    c[3] = n3;
}

} // namespace

Words4 philox4x32(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3,
                  uint32_t k0, uint32_t k1) {
    uint32_t c[4] = {c0, c1, c2, c3};
    for (int r = 0; r < 10; ++r) {
        round_once(c, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return Words4{{c[0], c[1], c[2], c[3]}};
}

double standard_normal(uint64_t seed, uint32_t replicate, uint32_t stream, int64_t index) {
    const uint64_t idx = uint64_t(index);
    const Words4 w = philox4x32(uint32_t(idx), uint32_t(idx >> 32), stream, replicate,
                                uint32_t(seed), uint32_t(seed >> 32));
    const uint64_t a = (uint64_t(w.w[0]) << 32) | w.w[1];
    const uint64_t b = (uint64_t(w.w[2]) << 32) | w.w[3];
    const double u1 = (double(a) + 1.0) * 0x1p-64;  // (0,1]
    const double u2 = double(b) * 0x1p-64;          // [0,1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi_ * u2);
}

} // namespace rng

CovarianceSpec CovarianceSpec::power_law(int K, double sigma2, double s, double flux_amplitude) {
    if (K < 1) throw std::invalid_argument("covariance truncation K must be >= 1");
    CovarianceSpec cov;
    cov.q.resize(K);
    for (int k = 1; k <= K; ++k) cov.q[k - 1] = sigma2 * std::pow(double(k), -2.0 * s);
    cov.f.assign(K, 0.0);
    cov.f[0] = flux_amplitude;
    return cov;
}

double CovarianceSpec::kernel(double z, double zp) const {
    double s = 0.0;
    for (int k = 1; k <= K(); ++k)
        s += q[k - 1] * 2.0 * std::cos(k * kPi_ * z) * std::cos(k * kPi_ * zp);
    return s;
}

namespace {

int64_t index_of_time(double t, double dt, const char* what) {
    const double r = t / dt;
    const int64_t i = int64_t(std::llround(r));
    if (std::abs(r - double(i)) > 1e-9)
        throw std::invalid_argument(std::string(what) + " must be an integer multiple of dt");
    return i;
}

} // namespace

NoisePath::NoisePath(int K, double dt, double t0, int64_t n_steps, uint64_t seed,
                     uint32_t replicate)
    : K_(K), dt_(dt), n_steps_(n_steps), seed_(seed), replicate_(replicate) {
    if (K < 0) throw std::invalid_argument("NoisePath: K must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("NoisePath: dt must be > 0");
    if (n_steps < 0) throw std::invalid_argument("NoisePath: n_steps must be >= 0");
    i0_ = index_of_time(t0, dt, "NoisePath t0");
    const double root_dt = std::sqrt(dt_);
    inc_.resize(size_t(n_steps_) * K_);
    for (int64_t s = 0; s < n_steps_; ++s)
        for (int k = 1; k <= K_; ++k)
            inc_[size_t(s) * K_ + (k - 1)] =
                root_dt * rng::standard_normal(seed_, replicate_, uint32_t(k), i0_ + s);
}

NoisePath NoisePath::wiener_shift(double t) const {
    const int64_t di = index_of_time(t, dt_, "wiener_shift t");
    if (generable_) return with_window(double(i0_ + di) * dt_, n_steps_);
    // Derived path: re-index within the stored window only.
    if (di < 0 || di > n_steps_)
        throw std::out_of_range("wiener_shift: window exceeds generable range of a derived path");
    NoisePath out;
    out.K_ = K_;
    out.dt_ = dt_;
    out.i0_ = i0_ + di;
    out.n_steps_ = n_steps_ - di;
    out.seed_ = seed_;
    out.replicate_ = replicate_;
    out.generable_ = false;
    out.inc_.assign(inc_.begin() + size_t(di) * K_, inc_.end());
    return out;
}

NoisePath NoisePath::with_window(double t0, int64_t n_steps) const {
    if (!generable_)
        throw std::out_of_range("NoisePath: derived path cannot be regenerated from its key");
    return NoisePath(K_, dt_, t0, n_steps, seed_, replicate_);
}

NoisePath NoisePath::coarsen(int factor) const {
    if (factor < 1) throw std::invalid_argument("coarsen: factor must be >= 1");
    if (n_steps_ % factor != 0) throw std::invalid_argument("coarsen: factor must divide n_steps");
    if (i0_ % factor != 0)
        throw std::invalid_argument("coarsen: window start must align with the coarse grid");
    NoisePath out;
    out.K_ = K_;
    out.dt_ = dt_ * factor;
    out.i0_ = i0_ / factor;
    out.n_steps_ = n_steps_ / factor;
    out.seed_ = seed_;
    out.replicate_ = replicate_;
    out.generable_ = false;
    out.inc_.assign(size_t(out.n_steps_) * K_, 0.0);
    for (int64_t s = 0; s < n_steps_; ++s)
        for (int k = 0; k < K_; ++k)
            out.inc_[size_t(s / factor) * K_ + k] += inc_[size_t(s) * K_ + k];
    return out;
}

NoisePath sample_path(const CovarianceSpec& cov, double dt, double t0, int64_t n_steps,
                      uint64_t seed, uint32_t replicate) {
    cov.validate();
    return NoisePath(cov.K(), dt, t0, n_steps, seed, replicate);
}

std::vector<double> flux_at_boundary(const CovarianceSpec& cov, const NoisePath& path,
                                     int64_t step) {
    const int K = cov.K();
    if (path.K() < K) throw std::invalid_argument("flux_at_boundary: path has fewer modes than cov");
    std::vector<double> g(K, 0.0);
    for (int k = 1; k <= K; ++k) {
        const double fk = (k - 1 < int(cov.f.size())) ? cov.f[k - 1] : 0.0;
        g[k - 1] = fk * path.dt() + std::sqrt(cov.q[k - 1]) * path.increment(step, k);
    }
    return g;
}

} // namespace gcur
