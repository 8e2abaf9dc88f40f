#pragma once

#include "gcur/spectral_field.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace gcur {

/// Per-step scalar diagnostics. `lyapunov` is 2||vtilde||^2 +
/// ||q||^2/(Ra^2 lambda2^2) with vtilde = S - eta1 when the homogenizer is
/// tracked and vtilde = S otherwise; at Ra = 0 the q term is omitted and
/// flagged. `energy_residual` is filled against the previous record in the
/// stream (0 on the first record).
struct DiagnosticsRecord {
    double t = 0.0;
    double enstrophy = 0.0;
    double ms_salinity = 0.0;
    double h_norm_sq = 0.0;
    double v_norm_sq = 0.0;
    double salinity_integral = 0.0;
    double lyapunov = 0.0;
    double eta_norm_sq = 0.0;
    double energy_residual = 0.0;
    // carried for residual evaluation, not part of the CSV schema
    double grad_vtilde_sq = 0.0;
    double grad_q_sq = 0.0;
    bool ra_term_omitted = false;
};

DiagnosticsRecord record(const StateU& u, const SpectralField* eta1,
                         const PhysicalParams& params, const PoincareConstants& pc, double t);

/// Residual of the Lyapunov energy inequality between consecutive records,
/// left-endpoint evaluation:
///   r = dL/dt + ||grad vtilde||^2
///       + (1/(Ra^2 l2^2) - 2 l1^2 ||eta1||^2) ||grad q||^2 - ||eta1||^2/l2^2.
/// Nonpositive up to discretization error when the dissipativity margin is
/// positive. First entry is 0.
std::vector<double> energy_residual(std::span<const DiagnosticsRecord> window,
                                    const PhysicalParams& params, const PoincareConstants& pc);

/// Fraction of steps whose residual exceeds tol_factor * dt * scale, where
/// scale is the sum of the magnitudes of the residual's terms at that step
/// (first-order quadrature error model).
struct ResidualReport {
    std::vector<double> residual;
    double violation_fraction = 0.0;
    int violations = 0;
};
ResidualReport energy_residual_report(std::span<const DiagnosticsRecord> window,
                                      const PhysicalParams& params, const PoincareConstants& pc,
                                      double dt, double tol_factor = 10.0);

/// Entry into and permanence in the ball {lyapunov <= R}, with a relative
/// tolerance band on the "remains inside" check.
struct AbsorbingEntry {
    bool entered = false;
    double entry_time = -1.0;
    bool stayed = false;
    double max_after_entry = 0.0;
};
AbsorbingEntry absorbing_check(std::span<const DiagnosticsRecord> traj, double radius,
                               double band = 0.05);

/// CSV schema: t,enstrophy,ms_salinity,h_norm_sq,v_norm_sq,salinity_integral,
/// lyapunov,eta_norm_sq,energy_residual (one header line, full precision).
void write_csv(std::ostream& os, std::span<const DiagnosticsRecord> records);
std::vector<DiagnosticsRecord> read_csv(std::istream& is);

} // namespace gcur
