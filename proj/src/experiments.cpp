#include "gcur/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace gcur {

void parallel_for(int n, const std::function<void(int)>& fn) {
    int workers = int(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GCUR_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) workers = cap;
    }
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

// Critical value of the 95% normal interval; batch means use the t quantile
// for the configured batch count.
constexpr double kZ95 = 1.959963984540054;

double t_quantile_975(int dof) {
    // Two-sided 95% t critical values; dense for small dof, asymptote beyond.
    static const double table[] = {0,     12.706, 4.303, 3.182, 2.776, 2.571, 2.447,
                                   2.365, 2.306,  2.262, 2.228, 2.201, 2.179, 2.160,
                                   2.145, 2.131,  2.120, 2.110, 2.101, 2.093, 2.086,
                                   2.080, 2.074,  2.069, 2.064, 2.060, 2.056, 2.052,
                                   2.048, 2.045,  2.042};
    if (dof <= 0) return std::numeric_limits<double>::infinity();
    if (dof <= 30) return table[dof];
    if (dof <= 60) return 2.0;
    return kZ95;
}

SeriesStats series_stats(const std::vector<const Trajectory*>& ok, size_t n_records,
                         double (*pick)(const DiagnosticsRecord&)) {
    SeriesStats s;
    const int M = int(ok.size());
    s.mean.assign(n_records, 0.0);
    s.variance.assign(n_records, 0.0);
    s.ci_half.assign(n_records, 0.0);
    if (M == 0) return s;
    for (size_t r = 0; r < n_records; ++r) {
        double mean = 0.0;
        for (const Trajectory* tr : ok) mean += pick(tr->records[r]);
        mean /= M;
        double var = 0.0;
        for (const Trajectory* tr : ok) {
            const double d = pick(tr->records[r]) - mean;
            var += d * d;
        }
        var = M > 1 ? var / (M - 1) : 0.0;
        s.mean[r] = mean;
        s.variance[r] = var;
        s.ci_half[r] = M > 1 ? kZ95 * std::sqrt(var / M) : 0.0;
    }
    return s;
}

} // namespace

EnsembleResult run_ensemble(const SimConfig& cfg, int M, double horizon) {
    if (M < 2) throw std::invalid_argument("run_ensemble: M must be >= 2");
    SimConfig base = cfg;
    base.n_steps = int64_t(std::llround(horizon / cfg.dt));
    base.validate();

    EnsembleResult out;
    out.M = M;
    out.trajectories.reserve(M);
    std::vector<Trajectory> trajs(size_t(M), Trajectory{{}, StateU(4, 4), OuState::zero(4, 4)});
    parallel_for(M, [&](int r) {
        SimConfig c = base;
        c.replicate = uint32_t(r);
        trajs[size_t(r)] = simulate(c);
    });
    out.trajectories = std::move(trajs);

    std::vector<const Trajectory*> ok;
    size_t n_records = 0;
    for (int r = 0; r < M; ++r) {
        const Trajectory& tr = out.trajectories[size_t(r)];
        if (tr.blew_up) {
            out.blown_replicates.push_back(r);
            continue;
        }
        ok.push_back(&tr);
        n_records = tr.records.size();
    }
    if (!ok.empty()) {
        out.t.resize(n_records);
        for (size_t i = 0; i < n_records; ++i) out.t[i] = ok[0]->records[i].t;
        out.enstrophy = series_stats(ok, n_records, [](const DiagnosticsRecord& r) { return r.enstrophy; });
        out.ms_salinity =
            series_stats(ok, n_records, [](const DiagnosticsRecord& r) { return r.ms_salinity; });
        out.h_norm_sq =
            series_stats(ok, n_records, [](const DiagnosticsRecord& r) { return r.h_norm_sq; });
        out.v_norm_sq =
            series_stats(ok, n_records, [](const DiagnosticsRecord& r) { return r.v_norm_sq; });
        out.lyapunov =
            series_stats(ok, n_records, [](const DiagnosticsRecord& r) { return r.lyapunov; });
    }
    return out;
}

namespace {

PlateauEstimate plateau_of(const EnsembleResult& ens, const SeriesStats& s, double burn_in) {
    PlateauEstimate p;
    size_t first = 0;
    while (first < ens.t.size() && ens.t[first] < burn_in) ++first;
    const size_t n = ens.t.size() - first;
    if (n < 4) throw std::invalid_argument("enstrophy_asymptotics: averaging window too short");
    double mean = 0.0, ci = 0.0;
    for (size_t i = first; i < ens.t.size(); ++i) {
        mean += s.mean[i];
        ci += s.ci_half[i];
    }
    p.value = mean / double(n);
    p.ci_half = ci / double(n);  // time-correlated; reported as the mean pointwise CI
    // Stationarity: halves of the window agree within their combined CIs.
    const size_t mid = first + n / 2;
    double m1 = 0.0, m2 = 0.0, c1 = 0.0, c2 = 0.0;
    for (size_t i = first; i < mid; ++i) {
        m1 += s.mean[i];
        c1 += s.ci_half[i];
    }
    for (size_t i = mid; i < ens.t.size(); ++i) {
        m2 += s.mean[i];
        c2 += s.ci_half[i];
    }
    m1 /= double(mid - first);
    c1 /= double(mid - first);
    m2 /= double(ens.t.size() - mid);
    c2 /= double(ens.t.size() - mid);
    p.plateaued = std::abs(m2 - m1) <= 2.0 * std::sqrt(c1 * c1 + c2 * c2) + 1e-15;
    return p;
}

} // namespace

EnstrophyAsymptotics enstrophy_asymptotics(const EnsembleResult& ens, double burn_in) {
    if (ens.t.empty()) throw std::invalid_argument("enstrophy_asymptotics: empty ensemble");
    if (ens.t.back() < 3.0 * burn_in)
        throw std::invalid_argument("enstrophy_asymptotics: horizon must be >= 3x burn_in");
    EnstrophyAsymptotics a;
    a.enstrophy = plateau_of(ens, ens.enstrophy, burn_in);
    a.h_norm_sq = plateau_of(ens, ens.h_norm_sq, burn_in);
    return a;
}

AffineFit affine_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("affine_fit: need matching arrays of size >= 2");
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    AffineFit f;
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("affine_fit: degenerate abscissae");
    f.b = (n * sxy - sx * sy) / denom;
    f.a = (sy - f.b * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.a + f.b * x[i]);
        ss_res += e * e;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

SyncResult synchronization_test(const SimConfig& cfg, const StateU& u0_a, const StateU& u0_b,
                                const NoisePath& path, double horizon, double fit_start_frac) {
    SimConfig c = cfg;
    c.n_steps = int64_t(std::llround(horizon / cfg.dt));
    c.validate();
    if (path.n_steps() < c.n_steps)
        throw std::invalid_argument("synchronization_test: path window too short");

    Stepper sa(c), sb(c);
    OuTransition outr(c.nx, c.nz, c.dt, c.cov);
    StateU a = u0_a, b = u0_b;
    OuState eta = c.eta_init == EtaInit::Stationary
                      ? ou_stationary_draw(c.cov, c.nx, c.nz, c.seed, c.replicate, 0.0)
                      : OuState::zero(c.nx, c.nz);

    auto dist = [&] {
        double s = 0.0;
        for (int i = 0; i < a.nx(); ++i)
            for (int j = 0; j < a.nz(); ++j) {
                const double dq = a.q.coef(i, j) - b.q.coef(i, j);
                const double ds = a.S.coef(i, j) - b.S.coef(i, j);
                s += dq * dq + ds * ds;
            }
        return std::sqrt(s);
    };

    SyncResult out;
    out.d0 = dist();
    out.identical = out.d0 == 0.0;
    out.t.push_back(0.0);
    out.d.push_back(out.d0);
    const bool homog = c.formulation == Formulation::HomogenizedV;
    for (int64_t s = 0; s < c.n_steps; ++s) {
        if (homog) {
            sa.step_homogenized(a, eta);
            sb.step_homogenized(b, eta);
            eta = outr.step(eta, path, s);
        } else {
            sa.step_direct(a, path, s);
            sb.step_direct(b, path, s);
        }
        if ((s + 1) % c.output_every == 0 || s + 1 == c.n_steps) {
            out.t.push_back(double(s + 1) * c.dt);
            out.d.push_back(dist());
        }
    }
    out.decayed = out.d.back() < out.d0;
    if (out.identical) return out;

    // Fit log d(t) = log d0' + rho t past the initial transient.
    const double t0 = fit_start_frac * horizon;
    std::vector<double> fx, fy;
    for (size_t i = 0; i < out.t.size(); ++i) {
        if (out.t[i] < t0 || out.d[i] <= 0.0) continue;
        fx.push_back(out.t[i]);
        fy.push_back(std::log(out.d[i]));
    }
    if (fx.size() >= 3) {
        AffineFit f = affine_fit(fx, fy);
        out.rho = f.b;
        // Standard error of the slope from the fit residuals.
        double sxx = 0, xbar = 0, ss_res = 0;
        for (double x : fx) xbar += x;
        xbar /= double(fx.size());
        for (size_t i = 0; i < fx.size(); ++i) {
            sxx += (fx[i] - xbar) * (fx[i] - xbar);
            const double e = fy[i] - (f.a + f.b * fx[i]);
            ss_res += e * e;
        }
        const double dof = double(fx.size()) - 2.0;
        out.rho_stderr = dof > 0 && sxx > 0 ? std::sqrt(ss_res / dof / sxx) : 0.0;
        out.fit_residual = dof > 0 ? std::sqrt(ss_res / dof) : 0.0;
    }
    return out;
}

PullbackResult pullback_run(const SimConfig& cfg, std::span<const double> windows,
                            const StateU& u0, const StateU* u0_b) {
    if (windows.size() < 2)
        throw std::invalid_argument("pullback_run: need at least two windows");
    for (size_t i = 1; i < windows.size(); ++i)
        if (!(windows[i] > windows[i - 1]))
            throw std::invalid_argument("pullback_run: windows must ascend");

    PullbackResult out;
    out.windows.assign(windows.begin(), windows.end());
    std::vector<StateU> states;
    states.reserve(windows.size());
    std::vector<StateU> states_b;

    for (double T : windows) {
        SimConfig c = cfg;
        c.n_steps = int64_t(std::llround(T / cfg.dt));
        c.output_every = std::max<int64_t>(c.n_steps, 1);
        NoisePath p = sample_path(cfg.cov, cfg.dt, -double(c.n_steps) * cfg.dt, c.n_steps,
                                  cfg.seed, cfg.replicate);
        states.push_back(simulate(c, p, u0).final_state);
        if (u0_b) states_b.push_back(simulate(c, p, *u0_b).final_state);
    }
    for (size_t i = 1; i < states.size(); ++i) {
        double s = 0.0;
        for (int m = 0; m < states[i].nx(); ++m)
            for (int k = 0; k < states[i].nz(); ++k) {
                const double dq = states[i].q.coef(m, k) - states[i - 1].q.coef(m, k);
                const double ds = states[i].S.coef(m, k) - states[i - 1].S.coef(m, k);
                s += dq * dq + ds * ds;
            }
        out.successive_distance.push_back(std::sqrt(s));
    }
    if (u0_b) {
        double s = 0.0;
        const StateU& xa = states.back();
        const StateU& xb = states_b.back();
        for (int m = 0; m < xa.nx(); ++m)
            for (int k = 0; k < xa.nz(); ++k) {
                const double dq = xa.q.coef(m, k) - xb.q.coef(m, k);
                const double ds = xa.S.coef(m, k) - xb.S.coef(m, k);
                s += dq * dq + ds * ds;
            }
        out.cross_ic_distance = std::sqrt(s);
    }
    return out;
}

namespace {

AvgEstimate batch_means(std::span<const double> series, int n_batches) {
    AvgEstimate e;
    const size_t n = series.size();
    if (int(n) < 2 * n_batches)
        throw std::invalid_argument("batch means: too few samples for the batch count");
    const size_t len = n / size_t(n_batches);
    std::vector<double> batch(size_t(n_batches), 0.0);
    for (int b = 0; b < n_batches; ++b) {
        for (size_t i = 0; i < len; ++i) batch[size_t(b)] += series[size_t(b) * len + i];
        batch[size_t(b)] /= double(len);
    }
    double mean = 0.0;
    for (double v : batch) mean += v;
    mean /= n_batches;
    double var = 0.0;
    for (double v : batch) var += (v - mean) * (v - mean);
    var /= double(n_batches - 1);
    e.value = mean;
    e.ci_half = t_quantile_975(n_batches - 1) * std::sqrt(var / n_batches);
    return e;
}

GapReport gap_for(std::span<const double> long_series, std::span<const double> ens_samples,
                  int n_batches) {
    GapReport g;
    g.time_avg = batch_means(long_series, n_batches);
    double mean = 0.0;
    for (double v : ens_samples) mean += v;
    mean /= double(ens_samples.size());
    double var = 0.0;
    for (double v : ens_samples) var += (v - mean) * (v - mean);
    var /= double(ens_samples.size() - 1);
    g.ens_avg.value = mean;
    g.ens_avg.ci_half = kZ95 * std::sqrt(var / double(ens_samples.size()));
    g.gap = std::abs(g.time_avg.value - g.ens_avg.value);
    g.combined_ci = std::sqrt(g.time_avg.ci_half * g.time_avg.ci_half +
                              g.ens_avg.ci_half * g.ens_avg.ci_half);
    g.within_ci = g.gap <= g.combined_ci;

    const size_t half = long_series.size() / 2;
    g.half1 = batch_means(long_series.subspan(0, half), std::max(2, n_batches / 2));
    g.half2 = batch_means(long_series.subspan(half), std::max(2, n_batches / 2));
    g.halves_consistent =
        std::abs(g.half1.value - g.half2.value) <=
        std::sqrt(g.half1.ci_half * g.half1.ci_half + g.half2.ci_half * g.half2.ci_half);
    return g;
}

} // namespace

ErgodicityReport ergodicity_gap(const SimConfig& cfg, double t_long, int M, double t_obs,
                                double burn_in, int n_batches) {
    if (M < 2) throw std::invalid_argument("ergodicity_gap: M must be >= 2");
    if (!(t_long > 2.0 * burn_in) || !(t_obs > burn_in))
        throw std::invalid_argument("ergodicity_gap: horizons must exceed the burn-in");

    ErgodicityReport rep;
    rep.batches = n_batches;
    rep.t_long = t_long;
    rep.t_obs = t_obs;
    rep.burn_in = burn_in;
    rep.M = M;

    // One long path, stationary-regime time averages past the burn-in.
    SimConfig lc = cfg;
    lc.n_steps = int64_t(std::llround(t_long / cfg.dt));
    Trajectory long_run = simulate(lc);
    if (long_run.blew_up) throw std::runtime_error("ergodicity_gap: long run blew up");
    std::vector<double> ens_series, sal_series;
    for (const auto& r : long_run.records) {
        if (r.t < burn_in) continue;
        ens_series.push_back(r.enstrophy);
        sal_series.push_back(r.ms_salinity);
    }

    // Ensemble at fixed observation time over replicates 0..M-1.
    EnsembleResult ens = run_ensemble(cfg, M, t_obs);
    std::vector<double> ens_enstrophy, ens_salinity;
    for (const auto& tr : ens.trajectories) {
        if (tr.blew_up) continue;
        ens_enstrophy.push_back(tr.records.back().enstrophy);
        ens_salinity.push_back(tr.records.back().ms_salinity);
    }
    if (ens_enstrophy.size() < 2) throw std::runtime_error("ergodicity_gap: ensemble too small");

    rep.enstrophy = gap_for(ens_series, ens_enstrophy, n_batches);
    rep.ms_salinity = gap_for(sal_series, ens_salinity, n_batches);
    return rep;
}

} // namespace gcur
