#pragma once

#include <span>
#include <vector>

namespace gcur {

/// Per-axis spectral basis on (0,1).
/// Sine:   sqrt(2)*sin(m*pi*x), m = 1..n   (homogeneous Dirichlet)
/// Cosine: 1 (m=0), sqrt(2)*cos(m*pi*x), m = 1..n-1  (homogeneous Neumann)
enum class Basis1D { Sine, Cosine };

namespace fft {

/// Evaluate a coefficient array on the cell-centered collocation grid.
/// coeffs is nx*nz (x-major), grid is ngx*ngz (x-major) with
/// x_i = (i+1/2)/ngx, z_j = (j+1/2)/ngz. Requires ngx >= nx+1, ngz >= nz+1
/// for Sine axes (the top DST mode must stay free) and ngx >= nx for Cosine.
void to_grid(std::span<const double> coeffs, int nx, int nz,
             Basis1D bx, Basis1D bz,
             std::span<double> grid, int ngx, int ngz);

/// Project grid values onto the leading nx*nz orthonormal modes.
/// Exact inverse of to_grid for band-limited data.
void to_spectral(std::span<const double> grid, int ngx, int ngz,
                 Basis1D bx, Basis1D bz,
                 std::span<double> coeffs, int nx, int nz);

} // namespace fft
} // namespace gcur
