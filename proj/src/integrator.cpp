#include "gcur/integrator.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace gcur {

void SimConfig::validate() const {
    params.validate();
    cov.validate();
    if (nx < 4 || nz < 4) throw std::invalid_argument("nx, nz must be >= 4");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (n_steps < 0) throw std::invalid_argument("n_steps must be >= 0");
    if (output_every < 1) throw std::invalid_argument("output_every must be >= 1");
    if (!(cfl_safety > 0.0)) throw std::invalid_argument("cfl_safety must be > 0");
    if (!(blowup_factor > 1.0)) throw std::invalid_argument("blowup_factor must be > 1");
    if (cov.K() > nz - 1)
        throw std::invalid_argument("covariance truncation K exceeds the resolved z-modes");
    if (initial.kind == InitialCondition::Kind::Eigenmode) {
        if (initial.field != "q" && initial.field != "S")
            throw std::invalid_argument("initial.field must be \"q\" or \"S\"");
        if (initial.field == "q" && (initial.m < 1 || initial.m > nx || initial.k < 1 ||
                                     initial.k > nz))
            throw std::invalid_argument("initial eigenmode outside the vorticity band");
        if (initial.field == "S" &&
            (initial.m < 0 || initial.m >= nx || initial.k < 0 || initial.k >= nz ||
             (initial.m == 0 && initial.k == 0)))
            throw std::invalid_argument("initial eigenmode outside the zero-mean salinity band");
    }
    if (initial.kind == InitialCondition::Kind::RandomBand) {
        if (initial.band < 1 || initial.band > std::min(nx, nz))
            throw std::invalid_argument("initial.band outside the resolved band");
        if (!(initial.h_norm >= 0.0)) throw std::invalid_argument("initial.h_norm must be >= 0");
    }
}

Stepper::Stepper(const SimConfig& cfg)
    : cfg_(cfg),
      rhs_{SpectralField::dirichlet(cfg.nx, cfg.nz), SpectralField::neumann(cfg.nx, cfg.nz),
           SpectralField::dirichlet(cfg.nx, cfg.nz)} {
    cfg_.validate();
    const int nx = cfg.nx, nz = cfg.nz;
    const size_t n = size_t(nx) * nz;
    decay_q_.resize(n);
    dfac_q_.resize(n);
    decay_s_.resize(n);
    dfac_s_.resize(n);
    bdet_.assign(n, 0.0);
    bnoise_.assign(n, 0.0);
    const double dt = cfg.dt, pr = cfg.params.Pr;
    const int K = cfg.cov.K();
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nz; ++j) {
            const size_t idx = size_t(i) * nz + j;
            // Vorticity: sine modes (i+1, j+1), diffusion coefficient 1.
            const double mq = (double(i + 1) * (i + 1) + double(j + 1) * (j + 1)) * kPi * kPi;
            decay_q_[idx] = std::exp(-mq * dt);
            dfac_q_[idx] = (1.0 - decay_q_[idx]) / mq;
            // Salinity: cosine modes (i, j), diffusion coefficient 1/Pr.
            if (i == 0 && j == 0) {
                decay_s_[idx] = 1.0;
                dfac_s_[idx] = dt;
                continue;
            }
            const double ms = (double(i) * i + double(j) * j) * kPi * kPi;
            const double nu = ms / pr;
            const double es = std::exp(-nu * dt);
            decay_s_[idx] = es;
            dfac_s_[idx] = (1.0 - es) / nu;
            if (j >= 1 && j <= K) {
                bdet_[idx] = -boundary_coupling(i) * (1.0 - es) / ms;
                bnoise_[idx] = -(1.0 / pr) * boundary_coupling(i) *
                               std::sqrt(cfg.cov.q[size_t(j - 1)]) *
                               std::sqrt((1.0 - es * es) / (2.0 * nu * dt));
            }
        }
    }
    hmin_ = std::min(1.0 / (2.0 * nx), 1.0 / (2.0 * nz));
    const size_t ng = size_t(2 * nx) * (2 * nz);
    gq_.resize(ng);
    gpsi_.resize(ng);
    gs_.resize(ng);
    gj_.resize(ng);
}

void Stepper::cfl_guard(const SpectralField& psi) const {
    const double limit = cfg_.cfl_safety * hmin_;
    if (max_velocity_bound(psi) * cfg_.dt <= limit) return;
    const double vmax = max_velocity_exact(psi);
    if (vmax * cfg_.dt > limit) {
        std::ostringstream msg;
        msg << "CFL guard: dt = " << cfg_.dt << " exceeds " << limit / vmax
            << " (max|grad psi| = " << vmax << ", safety " << cfg_.cfl_safety << ")";
        throw CflViolation(msg.str());
    }
}

void Stepper::eval_rhs(const SpectralField& q, const SpectralField& s_adv) {
    SpectralField psi = solve_streamfunction(q);
    cfl_guard(psi);
    q.grid_values(gq_);
    psi.grid_values(gpsi_);
    s_adv.grid_values(gs_);
    const int ngx = q.ngx(), ngz = q.ngz();

    detail::arakawa_grid(gq_, Basis1D::Sine, Basis1D::Sine, gpsi_, Basis1D::Sine, Basis1D::Sine,
                         ngx, ngz, gj_);
    rhs_.f1q.from_grid(gj_);
    rhs_.f1q *= -1.0;

    detail::arakawa_grid(gs_, Basis1D::Cosine, Basis1D::Cosine, gpsi_, Basis1D::Sine,
                         Basis1D::Sine, ngx, ngz, gj_);
    rhs_.f1s.from_grid(gj_);
    rhs_.f1s *= -1.0;
    // Projection of the advection term onto the constant mode is analytically 0.
    rhs_.f1s.enforce_zero_mean();

    rhs_.f2q = project_z_cosine_to_sine(deriv_x(s_adv));
    rhs_.f2q *= -cfg_.params.Ra;
}

void Stepper::apply_linear_q(SpectralField& q) const {
    auto c = q.coeffs();
    auto f1 = rhs_.f1q.coeffs();
    auto f2 = rhs_.f2q.coeffs();
    for (size_t i = 0; i < c.size(); ++i)
        c[i] = decay_q_[i] * c[i] + dfac_q_[i] * (f1[i] + f2[i]);
}

void Stepper::apply_linear_s(SpectralField& s) const {
    auto c = s.coeffs();
    auto f1 = rhs_.f1s.coeffs();
    for (size_t i = 0; i < c.size(); ++i) c[i] = decay_s_[i] * c[i] + dfac_s_[i] * f1[i];
}

void Stepper::step_homogenized(StateU& v, const OuState& eta) {
    SpectralField s_tot = v.S;
    s_tot += eta.eta1;
    eval_rhs(v.q, s_tot);
    apply_linear_q(v.q);
    apply_linear_s(v.S);
}

void Stepper::step_direct(StateU& u, const NoisePath& path, int64_t step_index) {
    eval_rhs(u.q, u.S);
    // Explicit Euler substep for the smooth terms, then exact linear decay.
    {
        auto c = u.q.coeffs();
        auto f1 = rhs_.f1q.coeffs();
        auto f2 = rhs_.f2q.coeffs();
        for (size_t i = 0; i < c.size(); ++i)
            c[i] = decay_q_[i] * (c[i] + cfg_.dt * (f1[i] + f2[i]));
    }
    {
        auto c = u.S.coeffs();
        auto f1 = rhs_.f1s.coeffs();
        for (size_t i = 0; i < c.size(); ++i)
            c[i] = decay_s_[i] * (c[i] + cfg_.dt * f1[i]);
    }
    // Exact flow of the boundary-forced affine subproblem: the Neumann data
    // f_k dt + sqrt(q_k) dB_k enters through the Galerkin coupling with the
    // same per-mode transition the homogenizer uses.
    const int nz = cfg_.nz;
    const int K = cfg_.cov.K();
    auto c = u.S.coeffs();
    for (int k = 1; k <= K; ++k) {
        const double fk = (k - 1 < int(cfg_.cov.f.size())) ? cfg_.cov.f[k - 1] : 0.0;
        const double db = path.increment(step_index, k);
        if (fk == 0.0 && db == 0.0) continue;
        for (int m = 0; m < cfg_.nx; ++m) {
            const size_t idx = size_t(m) * nz + k;
            c[idx] += bdet_[idx] * fk + bnoise_[idx] * db;
        }
    }
}

StateU initial_state(const SimConfig& cfg) {
    cfg.validate();
    StateU u(cfg.nx, cfg.nz);
    switch (cfg.initial.kind) {
        case InitialCondition::Kind::Zero:
            break;
        case InitialCondition::Kind::Eigenmode:
            if (cfg.initial.field == "q")
                u.q.coef(cfg.initial.m - 1, cfg.initial.k - 1) = cfg.initial.amplitude;
            else
                u.S.coef(cfg.initial.m, cfg.initial.k) = cfg.initial.amplitude;
            break;
        case InitialCondition::Kind::RandomBand: {
            // Decaying random coefficients on both fields, scaled to the target
            // H-norm; keyed draws keep ensembles reproducible.
            int64_t idx = 0;
            for (int i = 0; i < cfg.nx; ++i) {
                for (int j = 0; j < cfg.nz; ++j, ++idx) {
                    const bool in_q = u.q.mode_m(i) <= cfg.initial.band &&
                                      u.q.mode_k(j) <= cfg.initial.band;
                    if (in_q) {
                        const double w = 1.0 / (1.0 + u.q.mu(i, j) / (kPi * kPi));
                        u.q.coef(i, j) =
                            w * rng::standard_normal(cfg.seed, cfg.replicate, rng::kInitStream, idx);
                    }
                    const bool in_s = u.S.mode_m(i) <= cfg.initial.band &&
                                      u.S.mode_k(j) <= cfg.initial.band && !(i == 0 && j == 0);
                    if (in_s) {
                        const double w = 1.0 / (1.0 + u.S.mu(i, j) / (kPi * kPi));
                        u.S.coef(i, j) = w * rng::standard_normal(cfg.seed, cfg.replicate,
                                                                  rng::kInitStream + 1, idx);
                    }
                }
            }
            const double h = std::sqrt(u.h_norm_sq());
            if (h > 0.0 && cfg.initial.h_norm > 0.0) {
                u.q *= cfg.initial.h_norm / h;
                u.S *= cfg.initial.h_norm / h;
            } else if (cfg.initial.h_norm == 0.0) {
                u.q *= 0.0;
                u.S *= 0.0;
            }
            break;
        }
    }
    return u;
}

NoisePath make_path(const SimConfig& cfg, double t0, int64_t n_steps) {
    return sample_path(cfg.cov, cfg.dt, t0, n_steps, cfg.seed, cfg.replicate);
}

namespace {

OuState default_eta(const SimConfig& cfg) {
    if (cfg.eta_init == EtaInit::Stationary)
        return ou_stationary_draw(cfg.cov, cfg.nx, cfg.nz, cfg.seed, cfg.replicate, 0.0);
    return OuState::zero(cfg.nx, cfg.nz);
}

uint64_t fnv1a(const void* data, size_t n, uint64_t h) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

uint64_t Trajectory::hash() const {
    uint64_t h = 14695981039346656037ull;
    for (const auto& r : records) {
        const double cols[9] = {r.t,       r.enstrophy,   r.ms_salinity,    r.h_norm_sq,
                                r.v_norm_sq, r.salinity_integral, r.lyapunov, r.eta_norm_sq,
                                r.energy_residual};
        h = fnv1a(cols, sizeof cols, h);
    }
    auto hq = final_state.q.coeffs();
    auto hs = final_state.S.coeffs();
    h = fnv1a(hq.data(), hq.size_bytes(), h);
    h = fnv1a(hs.data(), hs.size_bytes(), h);
    return h;
}

Trajectory simulate(const SimConfig& cfg, const NoisePath& path, const StateU& u0,
                    std::optional<OuState> eta0) {
    cfg.validate();
    if (u0.nx() != cfg.nx || u0.nz() != cfg.nz)
        throw std::invalid_argument("simulate: initial state resolution mismatch");
    if (std::abs(path.dt() - cfg.dt) > 1e-12 * cfg.dt)
        throw std::invalid_argument("simulate: path dt differs from config dt");
    if (path.n_steps() < cfg.n_steps)
        throw std::invalid_argument("simulate: path window shorter than the run");

    const PoincareConstants pc = poincare_constants(cfg.nx, cfg.nz);
    const bool homog = cfg.formulation == Formulation::HomogenizedV;
    Stepper stepper(cfg);
    OuTransition outr(cfg.nx, cfg.nz, cfg.dt, cfg.cov);

    Trajectory traj{{}, u0, eta0 ? *eta0 : default_eta(cfg), cfg.dt, cfg.n_steps,
                    cfg.seed, cfg.replicate, 0.0, false, -1};
    StateU& u = traj.final_state;
    OuState& eta = traj.final_eta;

    const double scale = std::max(std::sqrt(u.h_norm_sq()), 1.0);
    const double blowup_sq = (cfg.blowup_factor * scale) * (cfg.blowup_factor * scale);

    auto physical = [&](void) -> StateU {
        if (!homog) return u;
        StateU tot = u;
        tot.S += eta.eta1;
        return tot;
    };
    traj.records.push_back(record(physical(), &eta.eta1, cfg.params, pc, 0.0));
    traj.max_abs_salinity_integral = std::abs(u.salinity_integral());

    for (int64_t s = 0; s < cfg.n_steps; ++s) {
        if (homog)
            stepper.step_homogenized(u, eta);
        else
            stepper.step_direct(u, path, s);
        eta = outr.step(eta, path, s);

        traj.max_abs_salinity_integral =
            std::max(traj.max_abs_salinity_integral, std::abs(u.salinity_integral()));
        const double h2 = u.h_norm_sq();
        if (!std::isfinite(h2) || h2 > blowup_sq) {
            traj.blew_up = true;
            traj.blowup_step = s + 1;
            traj.records.push_back(record(physical(), &eta.eta1, cfg.params, pc, double(s + 1) * cfg.dt));
            break;
        }
        if ((s + 1) % cfg.output_every == 0 || s + 1 == cfg.n_steps)
            traj.records.push_back(record(physical(), &eta.eta1, cfg.params, pc, double(s + 1) * cfg.dt));
    }
    if (traj.records.size() >= 2) {
        auto res = energy_residual(traj.records, cfg.params, pc);
        for (size_t i = 0; i < res.size(); ++i) traj.records[i].energy_residual = res[i];
    }
    return traj;
}

Trajectory simulate(const SimConfig& cfg) {
    return simulate(cfg, make_path(cfg, 0.0, cfg.n_steps), initial_state(cfg));
}

StateU step_v(const StateU& v, const OuState& eta, const SimConfig& cfg) {
    Stepper st(cfg);
    StateU out = v;
    st.step_homogenized(out, eta);
    return out;
}

StateU step_u_direct(const StateU& u, const NoisePath& path, int64_t step_index,
                     const SimConfig& cfg) {
    Stepper st(cfg);
    StateU out = u;
    st.step_direct(out, path, step_index);
    return out;
}

namespace {

int64_t steps_of(double t, double dt, const char* what) {
    const double r = t / dt;
    const int64_t n = int64_t(std::llround(r));
    if (std::abs(r - double(n)) > 1e-9)
        throw std::invalid_argument(std::string(what) + " must be a multiple of dt");
    return n;
}

double h_distance(const StateU& a, const StateU& b) {
    double s = 0.0;
    for (int i = 0; i < a.nx(); ++i)
        for (int j = 0; j < a.nz(); ++j) {
            const double dq = a.q.coef(i, j) - b.q.coef(i, j);
            const double ds = a.S.coef(i, j) - b.S.coef(i, j);
            s += dq * dq + ds * ds;
        }
    return std::sqrt(s);
}

} // namespace

double verify_cocycle(const SimConfig& cfg, const NoisePath& path, const StateU& u0, double t,
                      double tau) {
    const int64_t nt = steps_of(t, cfg.dt, "t");
    const int64_t ntau = steps_of(tau, cfg.dt, "tau");
    if (path.n_steps() < nt + ntau)
        throw std::invalid_argument("verify_cocycle: path window too short");

    SimConfig cfull = cfg;
    cfull.n_steps = nt + ntau;
    cfull.output_every = std::max<int64_t>(1, nt + ntau);
    Trajectory full = simulate(cfull, path, u0);

    SimConfig cleg = cfg;
    cleg.n_steps = ntau;
    cleg.output_every = std::max<int64_t>(1, ntau);
    Trajectory leg1 = simulate(cleg, path, u0);

    NoisePath shifted = path.wiener_shift(tau);
    SimConfig cleg2 = cfg;
    cleg2.n_steps = nt;
    cleg2.output_every = std::max<int64_t>(1, nt);
    Trajectory leg2 = simulate(cleg2, shifted, leg1.final_state, leg1.final_eta);

    return h_distance(full.final_state, leg2.final_state);
}

} // namespace gcur
