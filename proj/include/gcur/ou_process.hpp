#pragma once

#include "gcur/noise.hpp"
#include "gcur/spectral_field.hpp"

#include <span>

namespace gcur {

/// Salinity-component boundary homogenizer eta = (0, eta1): the heat equation
/// driven through the inlet Neumann flux, advanced by the exact per-mode
/// Ornstein-Uhlenbeck transition.
struct OuState {
    SpectralField eta1;
    double t = 0.0;

    static OuState zero(int nx, int nz) { return OuState{SpectralField::neumann(nx, nz), 0.0}; }
};

/// Galerkin coupling of cosine mode m to the x = 0 flux: the boundary trace
/// phi_m(0) of the normalized basis function (1 for m = 0, sqrt(2) otherwise).
inline double boundary_coupling(int m) { return m == 0 ? 1.0 : std::sqrt(2.0); }

/// Solution of Laplace(h) = 0 with dh/dx(0,z) = g(z), zero flux on the other
/// sides and zero mean. g is indexed by z-mode number k = 0..; a nonzero k = 0
/// entry is rejected (no zero-mean solution exists). Coefficients come out as
/// h_mk = -phi_m(0) g_k / ((m^2+k^2) pi^2).
SpectralField neumann_map(std::span<const double> flux, int nx, int nz);

/// Per-mode exact OU transition factors for a fixed (nx, nz, dt, cov).
/// Coefficients with the same z-mode k share the Brownian increment beta_k;
/// the noise factor is scaled so each coefficient's stationary variance is
/// exactly gamma_m^2 q_k / (2 mu_mk).
class OuTransition {
public:
    OuTransition(int nx, int nz, double dt, CovarianceSpec cov);

    OuState step(const OuState& state, const NoisePath& path, int64_t step_index) const;

    int nx() const { return nx_; }
    int nz() const { return nz_; }
    double dt() const { return dt_; }
    const CovarianceSpec& cov() const { return cov_; }

private:
    int nx_, nz_;
    double dt_;
    CovarianceSpec cov_;
    std::vector<double> decay_;      // e^{-mu dt}
    std::vector<double> det_;        // -phi_m f_k (1-e^{-mu dt})/mu
    std::vector<double> noise_amp_;  // -phi_m sqrt(q_k) sqrt((1-e^{-2 mu dt})/(2 mu dt))
};

/// One exact OU step (convenience wrapper; hot loops should hold an
/// OuTransition).
OuState ou_exact_step(const OuState& state, const CovarianceSpec& cov, const NoisePath& path,
                      int64_t step_index, double dt);

/// Analytic stationary law of eta1: deterministic mean h_F = neumann_map(F),
/// per-coefficient variances, and E||eta1||^2 = ||h_F||^2 + sum v_mk.
struct OuStationaryStats {
    SpectralField mean_field;
    std::vector<double> variances;  // nx*nz, x-major, aligned with coefficients
    double expected_norm_sq = 0.0;

    double variance(int m, int k, int nz) const { return variances[size_t(m) * nz + k]; }
};

OuStationaryStats stationary_stats(const CovarianceSpec& cov, int nx, int nz);

/// eta1 drawn coefficient-wise from the analytic stationary law, keyed by the
/// counter RNG so experiments stay reproducible.
OuState ou_stationary_draw(const CovarianceSpec& cov, int nx, int nz, uint64_t seed,
                           uint32_t replicate, double t);

/// 1/(Ra^2 lambda2^2) - 2 lambda1^2 E||eta1||^2; positive certifies the
/// absorbing-ball hypothesis. Ra = 0 gives +infinity (condition vacuous).
double dissipativity_margin(const PhysicalParams& params, const CovarianceSpec& cov,
                            const PoincareConstants& pc, int nx, int nz);

/// Exponential rate alpha of the Lyapunov decay implied by a positive margin:
/// min(lambda2^2/2, margin * lambda1^2 * Ra^2 * lambda2^2).
double lyapunov_decay_rate(const PhysicalParams& params, double margin,
                           const PoincareConstants& pc);

/// Finite-window pullback quadrature of R1 = 2 int_{-T}^0 e^{a tau}
/// ||eta1(theta_tau omega)||^2 / lambda2^2 dtau, with the truncation tail
/// bounded by the observed sup of ||eta1||^2.
struct AbsorbingRadius {
    double radius = 0.0;
    double tail_bound = 0.0;
};

AbsorbingRadius absorbing_radius(const CovarianceSpec& cov, const NoisePath& path, double alpha,
                                 double window, int nx, int nz, double lambda2,
                                 double warmup = 2.0);

} // namespace gcur
