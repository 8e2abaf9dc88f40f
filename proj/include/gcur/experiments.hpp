#pragma once

#include "gcur/integrator.hpp"

#include <functional>
#include <span>

namespace gcur {

/// Run fn(i) for i in [0, n) on up to GCUR_THREADS workers (default: hardware
/// concurrency). Work items must be independent; results are collected by the
/// caller per index, so aggregation order stays deterministic.
void parallel_for(int n, const std::function<void(int)>& fn);

struct SeriesStats {
    std::vector<double> mean, variance, ci_half;  // aligned with EnsembleResult::t
};

/// M replicate trajectories (replicates 0..M-1 of the master seed) and
/// per-time ensemble statistics of the diagnostic scalars. Replicates that
/// blow up are flagged and excluded from the statistics.
struct EnsembleResult {
    std::vector<Trajectory> trajectories;
    std::vector<double> t;
    SeriesStats enstrophy, ms_salinity, h_norm_sq, v_norm_sq, lyapunov;
    int M = 0;
    std::vector<int> blown_replicates;
    double confidence = 0.95;
};

EnsembleResult run_ensemble(const SimConfig& cfg, int M, double horizon);

/// Long-time plateau of the ensemble means over [burn_in, horizon], with a
/// stationarity check comparing the two halves of the averaging window.
struct PlateauEstimate {
    double value = 0.0;
    double ci_half = 0.0;
    bool plateaued = true;
};
struct EnstrophyAsymptotics {
    PlateauEstimate enstrophy;
    PlateauEstimate h_norm_sq;
};
EnstrophyAsymptotics enstrophy_asymptotics(const EnsembleResult& ens, double burn_in);

/// Least-squares line y = a + b x with coefficient of determination.
struct AffineFit {
    double a = 0.0, b = 0.0, r2 = 0.0;
};
AffineFit affine_fit(std::span<const double> x, std::span<const double> y);

/// Pathwise contraction probe: two trajectories on one noise path, fitted
/// exponential rate of d(t) = ||u1 - u2||_H over [fit_start, horizon].
struct SyncResult {
    std::vector<double> t, d;
    double d0 = 0.0;
    double rho = 0.0;         // fitted d log d / dt
    double rho_stderr = 0.0;
    double fit_residual = 0.0;
    bool identical = false;   // d0 == 0: uniqueness case, no fit
    bool decayed = false;     // d(end) < d(0)
};
SyncResult synchronization_test(const SimConfig& cfg, const StateU& u0_a, const StateU& u0_b,
                                const NoisePath& path, double horizon,
                                double fit_start_frac = 0.2);

/// Pullback probe: phi(T_j, theta_{-T_j} omega, u0) for ascending windows T_j
/// under one fixed omega, observed at time 0.
struct PullbackResult {
    std::vector<double> windows;
    std::vector<double> successive_distance;  // ||x_{j+1} - x_j||_H, size windows-1
    double cross_ic_distance = -1.0;          // at T_max, when a second u0 is given
};
PullbackResult pullback_run(const SimConfig& cfg, std::span<const double> windows,
                            const StateU& u0, const StateU* u0_b = nullptr);

/// Time average over one long path (batch-means CI) against the ensemble
/// average at a fixed large time (sample CI), for enstrophy and mean-square
/// salinity, plus the disjoint-halves consistency check on the long path.
struct AvgEstimate {
    double value = 0.0;
    double ci_half = 0.0;
};
struct GapReport {
    AvgEstimate time_avg, ens_avg;
    double gap = 0.0;
    double combined_ci = 0.0;
    bool within_ci = false;
    AvgEstimate half1, half2;
    bool halves_consistent = false;
};
struct ErgodicityReport {
    GapReport enstrophy;
    GapReport ms_salinity;
    int batches = 20;
    double t_long = 0.0, t_obs = 0.0, burn_in = 0.0;
    int M = 0;
};
ErgodicityReport ergodicity_gap(const SimConfig& cfg, double t_long, int M, double t_obs,
                                double burn_in, int n_batches = 20);

} // namespace gcur
