#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcur {

/// Identifier of the pinned noise-generation algorithm; recorded in run
/// metadata so stored paths stay decodable.
inline constexpr const char* kRngId = "philox4x32-10/box-muller/v1";

namespace rng {

struct Words4 {
    uint32_t w[4];
};

/// Philox4x32-10 counter-based generator (Salmon et al. reference constants).
Words4 philox4x32(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3,
                  uint32_t k0, uint32_t k1);

/// One standard normal from a (seed, replicate, stream, index) key:
/// Box-Muller cosine branch on two 64-bit uniforms built from one Philox call.
double standard_normal(uint64_t seed, uint32_t replicate, uint32_t stream, int64_t index);

/// Stream ids 0..2^30 are reserved for covariance modes; initial-condition
/// draws use kInitStream + linear index.
inline constexpr uint32_t kInitStream = 0x40000000u;

} // namespace rng

/// Eigenstructure of the boundary covariance operator Q against the zero-mean
/// cosine modes e_k(z) = sqrt(2) cos(k pi z), k = 1..K, plus the mean flux
/// profile F(z) expanded in the same modes. No k = 0 mode exists, so
/// int_0^1 [F(z) + w_dot(z,t)] dz = 0 holds by construction.
struct CovarianceSpec {
    std::vector<double> q;  // eigenvalues q_k, index 0 <-> k = 1
    std::vector<double> f;  // mean flux coefficients f_k, same indexing

    int K() const { return int(q.size()); }

    void validate() const {
        for (double v : q)
            if (!(v >= 0.0)) throw std::invalid_argument("covariance eigenvalues must be >= 0");
        if (f.size() > q.size())
            throw std::invalid_argument("mean flux has more modes than the covariance truncation");
    }

    /// Power-law family q_k = sigma2 * k^(-2s) with single-mode mean flux
    /// F(z) = a * sqrt(2) cos(pi z).
    static CovarianceSpec power_law(int K, double sigma2, double s, double flux_amplitude);

    double trace() const {
        double t = 0.0;
        for (double v : q) t += v;
        return t;
    }

    /// sum_k q_k * 2 cos(k pi z) cos(k pi z'), the covariance kernel of the
    /// reconstructed boundary noise.
    double kernel(double z, double zp) const;

    double flux_norm_sq() const {
        double t = 0.0;
        for (double v : f) t += v * v;
        return t;
    }
};

/// Discrete two-sided realization of the driving Wiener process: independent
/// N(0, dt) increments per covariance mode and time step. Increments are
/// addressed by absolute step index i (time t = i*dt), so windows at negative
/// times and the Wiener shift are reproducible from (seed, replicate) alone.
class NoisePath {
public:
    /// Window [t0, t0 + n_steps*dt); t0 must be an integer multiple of dt.
    NoisePath(int K, double dt, double t0, int64_t n_steps, uint64_t seed, uint32_t replicate);

    double dt() const { return dt_; }
    double t0() const { return double(i0_) * dt_; }
    int64_t first_index() const { return i0_; }
    int64_t n_steps() const { return n_steps_; }
    int K() const { return K_; }
    uint64_t seed() const { return seed_; }
    uint32_t replicate() const { return replicate_; }
    bool generable() const { return generable_; }

    /// Increment of beta_k over [t0 + step*dt, t0 + (step+1)*dt), k = 1..K.
    double increment(int64_t step, int k) const {
        if (step < 0 || step >= n_steps_) throw std::out_of_range("NoisePath: step outside window");
        if (k < 1 || k > K_) throw std::out_of_range("NoisePath: mode outside truncation");
        return inc_[size_t(step) * K_ + (k - 1)];
    }

    /// Path of the shifted sample theta_t omega: increment i of the result
    /// equals increment i + t/dt of this path. t must be a multiple of dt.
    /// Derived (aggregated) paths can only shift within their stored window.
    NoisePath wiener_shift(double t) const;

    /// Same window resized: [t0', t0' + n*dt). Regenerates from the key.
    NoisePath with_window(double t0, int64_t n_steps) const;

    /// Brownian-consistent coarsening: sums groups of `factor` increments.
    /// The result carries dt' = factor*dt and is no longer regenerable.
    NoisePath coarsen(int factor) const;

private:
    NoisePath() = default;

    int K_ = 0;
    double dt_ = 0.0;
    int64_t i0_ = 0;
    int64_t n_steps_ = 0;
    uint64_t seed_ = 0;
    uint32_t replicate_ = 0;
    bool generable_ = true;
    std::vector<double> inc_;  // [n_steps x K]
};

/// Sample a fresh path; identical arguments give bit-identical increments.
NoisePath sample_path(const CovarianceSpec& cov, double dt, double t0, int64_t n_steps,
                      uint64_t seed, uint32_t replicate);

/// Time-step-integrated Neumann data per mode: f_k*dt + sqrt(q_k)*dbeta_k.
std::vector<double> flux_at_boundary(const CovarianceSpec& cov, const NoisePath& path,
                                     int64_t step);

} // namespace gcur
