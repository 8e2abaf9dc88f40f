#pragma once

#include "gcur/spectral_field.hpp"

namespace gcur {

/// Right-hand-side increment in the state bases.
struct Tendency {
    SpectralField dq;
    SpectralField dS;
};

/// Solve -Laplace(psi) = q with psi = 0 on the boundary: divide each (m,k)
/// coefficient by (m^2+k^2)*pi^2.
SpectralField solve_streamfunction(const SpectralField& q);

/// Nine-point Arakawa Jacobian J(g,h) = g_x h_z - g_z h_x evaluated on the
/// shared collocation grid with reflection ghosts (odd across the boundary for
/// sine axes, even for cosine), projected back to the basis of g. The
/// reflection extension makes the discrete sums J.g and J.h vanish exactly,
/// mirroring <J(g,h),g> = <J(g,h),h> = 0.
SpectralField jacobian(const SpectralField& g, const SpectralField& h);

/// Exact spectral x-derivative; flips the x-basis parity. The top sine target
/// mode respectively the m = nx source cosine mode fall outside the stored
/// band and are dropped, which is exact for fields resolved one mode below the
/// band edge and the usual truncation otherwise.
SpectralField deriv_x(const SpectralField& f);
SpectralField deriv_z(const SpectralField& f);

/// Exact L2 projection of a (*,Cosine) field onto (*,Sine) z-modes via the
/// analytic cosine-to-sine coupling matrix.
SpectralField project_z_cosine_to_sine(const SpectralField& f);

/// F1(u) = (-J(q,psi), -J(S,psi)) with psi = solve_streamfunction(q).
Tendency apply_F1(const StateU& u);

/// F2(u) = (-Ra * dS/dx, 0), the x-derivative projected onto the vorticity
/// basis.
Tendency apply_F2(const StateU& u, const PhysicalParams& params);

/// H inner products.
double inner_product(const SpectralField& a, const SpectralField& b);
inline double h_inner(const Tendency& t, const StateU& u) {
    return inner_product(t.dq, u.q) + inner_product(t.dS, u.S);
}

/// Cheap upper bound on max(|psi_z|, |psi_x|) from the spectral l1 sum;
/// used by the CFL guard before falling back to the exact grid evaluation.
double max_velocity_bound(const SpectralField& psi);
/// Exact max over the collocation grid of max(|psi_z|, |psi_x|).
double max_velocity_exact(const SpectralField& psi);

namespace detail {

/// Nine-point Arakawa kernel on raw grid buffers (x-major) with reflection
/// ghosts determined by the per-axis parities.
void arakawa_grid(std::span<const double> a, Basis1D ax, Basis1D az,
                  std::span<const double> b, Basis1D bx, Basis1D bz, int ngx, int ngz,
                  std::span<double> out);

} // namespace detail

} // namespace gcur
