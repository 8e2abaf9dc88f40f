// gcur: spectral simulator and experiment harness for the stochastic
// gravity-current model (vorticity-streamfunction + salinity transport with
// white-noise inlet flux).

#include "gcur/config_io.hpp"
#include "gcur/diagnostics.hpp"
#include "gcur/experiments.hpp"
#include "gcur/integrator.hpp"
#include "gcur/manifest.hpp"
#include "gcur/snapshot_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gcur;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitStatistical = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<int64_t> steps;
    std::optional<double> dt;
    std::optional<uint64_t> seed;
    std::optional<uint32_t> replicate;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--steps", o.steps, "override n_steps");
    cmd->add_option("--dt", o.dt, "override dt");
    cmd->add_option("--seed", o.seed, "override master seed");
    cmd->add_option("--replicate", o.replicate, "override replicate id");
}

SimConfig load_config(const CommonOpts& o) {
    SimConfig cfg;
    if (!o.config_path.empty()) {
        std::ifstream is(o.config_path);
        if (!is) throw std::invalid_argument("cannot open config file " + o.config_path);
        std::stringstream ss;
        ss << is.rdbuf();
        cfg = parse_config(ss.str());
    }
    if (o.steps) cfg.n_steps = *o.steps;
    if (o.dt) cfg.dt = *o.dt;
    if (o.seed) cfg.seed = *o.seed;
    if (o.replicate) cfg.replicate = *o.replicate;
    cfg.validate();
    return cfg;
}

RunManifest start_manifest(const SimConfig& cfg, const std::string& command) {
    RunManifest m;
    m.config_json = serialize_config(cfg);
    m.command = command;
    m.started_utc = utc_now();
    return m;
}

void finish_manifest(RunManifest& m, const std::string& out_dir) {
    m.finished_utc = utc_now();
    write_manifest(m, out_dir);
}

void write_json(const std::string& out_dir, const std::string& name, const json& j) {
    std::ofstream os(out_dir + "/" + name, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + out_dir + "/" + name);
    os << j.dump(2) << "\n";
}

int cmd_simulate(const CommonOpts& o, const std::string& resume, int64_t start_step,
                 bool write_final) {
    SimConfig cfg = load_config(o);
    fs::create_directories(o.out_dir);
    RunManifest man = start_manifest(cfg, "simulate");

    StateU u0 = resume.empty() ? initial_state(cfg) : read_snapshot(resume, cfg.nx, cfg.nz);
    NoisePath path = make_path(cfg, double(start_step) * cfg.dt, cfg.n_steps);
    Trajectory traj = simulate(cfg, path, u0);

    {
        std::ofstream os(o.out_dir + "/diagnostics.csv", std::ios::trunc);
        write_csv(os, traj.records);
    }
    add_output(man, o.out_dir, "diagnostics.csv");
    if (write_final) {
        write_snapshot(traj.final_state, o.out_dir + "/final_state.gcur");
        add_output(man, o.out_dir, "final_state.gcur");
    }
    json summary;
    summary["n_steps"] = traj.n_steps;
    summary["trajectory_hash"] = hex64(traj.hash());
    summary["max_abs_salinity_integral"] = traj.max_abs_salinity_integral;
    summary["blew_up"] = traj.blew_up;
    if (traj.blew_up) {
        summary["blowup_step"] = traj.blowup_step;
        summary["blowup_h_norm_sq"] = traj.records.back().h_norm_sq;
    }
    write_json(o.out_dir, "simulate_summary.json", summary);
    add_output(man, o.out_dir, "simulate_summary.json");
    finish_manifest(man, o.out_dir);

    if (traj.blew_up) {
        std::cerr << "blow-up at step " << traj.blowup_step << " (t = "
                  << double(traj.blowup_step) * cfg.dt << "); see simulate_summary.json\n";
        return kExitNumerical;
    }
    std::cout << "simulate: " << traj.n_steps << " steps, trajectory hash "
              << hex64(traj.hash()) << "\n";
    return kExitOk;
}

int cmd_check(const CommonOpts& o) {
    SimConfig cfg = load_config(o);
    const PoincareConstants pc = poincare_constants(cfg.nx, cfg.nz);
    OuStationaryStats st = stationary_stats(cfg.cov, cfg.nx, cfg.nz);
    const double margin = dissipativity_margin(cfg.params, cfg.cov, pc, cfg.nx, cfg.nz);
    const double alpha = lyapunov_decay_rate(cfg.params, margin, pc);
    std::cout << "lambda1 (Dirichlet Poincare)  = " << pc.lambda1 << "\n"
              << "lambda2 (Neumann Poincare)    = " << pc.lambda2 << "\n"
              << "tr Q                          = " << cfg.cov.trace() << "\n"
              << "||F||_L2                      = " << std::sqrt(cfg.cov.flux_norm_sq()) << "\n"
              << "E||eta1||^2 (stationary)      = " << st.expected_norm_sq << "\n"
              << "dissipativity margin          = " << margin << "\n"
              << "lyapunov decay rate alpha     = " << alpha << "\n";
    std::cout << (margin > 0 ? "margin > 0: absorbing-ball hypothesis holds\n"
                             : "margin <= 0: outside the dissipativity regime\n");
    return kExitOk;
}

int cmd_ensemble(const CommonOpts& o, int M, double horizon, double burn_in) {
    SimConfig cfg = load_config(o);
    fs::create_directories(o.out_dir);
    RunManifest man = start_manifest(cfg, "ensemble");
    EnsembleResult ens = run_ensemble(cfg, M, horizon);

    json j;
    j["config"] = json::parse(serialize_config(cfg));
    j["M"] = M;
    j["horizon"] = horizon;
    j["blown_replicates"] = ens.blown_replicates;
    j["t"] = ens.t;
    auto dump_series = [&](const char* name, const SeriesStats& s) {
        j[name]["mean"] = s.mean;
        j[name]["variance"] = s.variance;
        j[name]["ci_half"] = s.ci_half;
    };
    dump_series("enstrophy", ens.enstrophy);
    dump_series("ms_salinity", ens.ms_salinity);
    dump_series("h_norm_sq", ens.h_norm_sq);
    dump_series("v_norm_sq", ens.v_norm_sq);
    dump_series("lyapunov", ens.lyapunov);
    if (3.0 * burn_in <= horizon) {
        EnstrophyAsymptotics asym = enstrophy_asymptotics(ens, burn_in);
        j["plateau"]["enstrophy"] = {{"value", asym.enstrophy.value},
                                     {"ci_half", asym.enstrophy.ci_half},
                                     {"plateaued", asym.enstrophy.plateaued}};
        j["plateau"]["h_norm_sq"] = {{"value", asym.h_norm_sq.value},
                                     {"ci_half", asym.h_norm_sq.ci_half},
                                     {"plateaued", asym.h_norm_sq.plateaued}};
    }
    write_json(o.out_dir, "ensemble_summary.json", j);
    add_output(man, o.out_dir, "ensemble_summary.json");
    finish_manifest(man, o.out_dir);

    if (int(ens.blown_replicates.size()) == M) {
        std::cerr << "ensemble: every replicate blew up\n";
        return kExitNumerical;
    }
    std::cout << "ensemble: " << M << " replicates to t = " << horizon << ", "
              << ens.blown_replicates.size() << " blew up\n";
    return kExitOk;
}

int cmd_sync(const CommonOpts& o, int n_seeds, double horizon, double delta) {
    SimConfig cfg = load_config(o);
    fs::create_directories(o.out_dir);
    RunManifest man = start_manifest(cfg, "sync");

    std::vector<json> rows(static_cast<size_t>(n_seeds));
    parallel_for(n_seeds, [&](int r) {
        SimConfig c = cfg;
        c.replicate = uint32_t(r);
        StateU a = initial_state(c);
        SimConfig cp = c;
        cp.seed = c.seed ^ 0x9e3779b97f4a7c15ull;
        cp.initial.kind = InitialCondition::Kind::RandomBand;
        cp.initial.h_norm = delta;
        StateU perturbed = a;
        {
            StateU d = initial_state(cp);
            perturbed.q += d.q;
            perturbed.S += d.S;
        }
        NoisePath path = make_path(c, 0.0, int64_t(std::llround(horizon / c.dt)));
        SyncResult res = synchronization_test(c, a, perturbed, path, horizon);
        json row;
        row["replicate"] = r;
        row["d0"] = res.d0;
        row["d_end"] = res.d.back();
        row["rho"] = res.rho;
        row["rho_stderr"] = res.rho_stderr;
        row["decayed"] = res.decayed;
        rows[size_t(r)] = std::move(row);
    });
    json per_seed = json::array();
    bool all_negative = true;
    for (auto& row : rows) {
        if (!(row["rho"].get<double>() < 0.0)) all_negative = false;
        per_seed.push_back(std::move(row));
    }
    json j;
    j["config"] = json::parse(serialize_config(cfg));
    j["horizon"] = horizon;
    j["delta"] = delta;
    j["seeds"] = n_seeds;
    j["per_seed"] = per_seed;
    j["all_rho_negative"] = all_negative;
    write_json(o.out_dir, "sync_summary.json", j);
    add_output(man, o.out_dir, "sync_summary.json");
    finish_manifest(man, o.out_dir);

    std::cout << "sync: " << n_seeds << " seeds, all rho < 0: " << (all_negative ? "yes" : "no")
              << "\n";
    return all_negative ? kExitOk : kExitStatistical;
}

int cmd_ergodicity(const CommonOpts& o, double t_long, int M, double t_obs, double burn_in,
                   int batches) {
    SimConfig cfg = load_config(o);
    fs::create_directories(o.out_dir);
    RunManifest man = start_manifest(cfg, "ergodicity");
    ErgodicityReport rep = ergodicity_gap(cfg, t_long, M, t_obs, burn_in, batches);

    auto gap_json = [](const GapReport& g) {
        json x;
        x["time_avg"] = {{"value", g.time_avg.value}, {"ci_half", g.time_avg.ci_half}};
        x["ens_avg"] = {{"value", g.ens_avg.value}, {"ci_half", g.ens_avg.ci_half}};
        x["gap"] = g.gap;
        x["combined_ci"] = g.combined_ci;
        x["within_ci"] = g.within_ci;
        x["half1"] = {{"value", g.half1.value}, {"ci_half", g.half1.ci_half}};
        x["half2"] = {{"value", g.half2.value}, {"ci_half", g.half2.ci_half}};
        x["halves_consistent"] = g.halves_consistent;
        return x;
    };
    json j;
    j["config"] = json::parse(serialize_config(cfg));
    j["t_long"] = rep.t_long;
    j["t_obs"] = rep.t_obs;
    j["burn_in"] = rep.burn_in;
    j["M"] = rep.M;
    j["batches"] = rep.batches;
    j["enstrophy"] = gap_json(rep.enstrophy);
    j["ms_salinity"] = gap_json(rep.ms_salinity);
    const bool pass = rep.enstrophy.within_ci && rep.enstrophy.halves_consistent;
    j["pass"] = pass;
    write_json(o.out_dir, "ergodicity_summary.json", j);
    add_output(man, o.out_dir, "ergodicity_summary.json");
    finish_manifest(man, o.out_dir);

    std::cout << "ergodicity: gap " << rep.enstrophy.gap << " vs combined CI "
              << rep.enstrophy.combined_ci << " -> " << (pass ? "consistent" : "inconsistent")
              << "\n";
    return pass ? kExitOk : kExitStatistical;
}

int cmd_pullback(const CommonOpts& o, std::vector<double> windows, double tol, bool two_ic) {
    SimConfig cfg = load_config(o);
    fs::create_directories(o.out_dir);
    RunManifest man = start_manifest(cfg, "pullback");
    if (windows.empty()) windows = {0.5, 1.0, 2.0, 4.0, 8.0};

    StateU u0 = initial_state(cfg);
    std::optional<StateU> u0_b;
    if (two_ic) {
        SimConfig cb = cfg;
        cb.seed = cfg.seed ^ 0x517cc1b727220a95ull;
        cb.initial.kind = InitialCondition::Kind::RandomBand;
        u0_b = initial_state(cb);
    }
    PullbackResult res = pullback_run(cfg, windows, u0, u0_b ? &*u0_b : nullptr);

    json j;
    j["config"] = json::parse(serialize_config(cfg));
    j["windows"] = res.windows;
    j["successive_distance"] = res.successive_distance;
    j["tolerance"] = tol;
    if (two_ic) j["cross_ic_distance"] = res.cross_ic_distance;
    const bool converged = res.successive_distance.back() <= tol;
    j["converged"] = converged;
    write_json(o.out_dir, "pullback_summary.json", j);
    add_output(man, o.out_dir, "pullback_summary.json");
    finish_manifest(man, o.out_dir);

    std::cout << "pullback: last successive distance " << res.successive_distance.back()
              << (converged ? " <= " : " > ") << tol << "\n";
    return converged ? kExitOk : kExitStatistical;
}

int cmd_diagnose(const CommonOpts& o, const std::string& csv_path, double radius) {
    SimConfig cfg = load_config(o);
    std::ifstream is(csv_path);
    if (!is) throw std::invalid_argument("cannot open " + csv_path);
    auto records = read_csv(is);
    if (records.size() < 2) throw std::invalid_argument("diagnostics csv has fewer than 2 rows");
    const PoincareConstants pc = poincare_constants(cfg.nx, cfg.nz);
    const double dt = records[1].t - records[0].t;
    auto rep = energy_residual_report(records, cfg.params, pc, dt);

    json j;
    j["config"] = json::parse(serialize_config(cfg));
    j["rows"] = records.size();
    j["residual_violation_fraction"] = rep.violation_fraction;
    j["residual_tolerance_model"] = "10 * dt * (sum of term magnitudes)";
    if (radius > 0.0) {
        AbsorbingEntry e = absorbing_check(records, radius);
        j["absorbing"] = {{"radius", radius},
                          {"entered", e.entered},
                          {"entry_time", e.entry_time},
                          {"stayed", e.stayed},
                          {"max_after_entry", e.max_after_entry}};
    }
    fs::create_directories(o.out_dir);
    RunManifest man = start_manifest(cfg, "diagnose");
    write_json(o.out_dir, "diagnose_summary.json", j);
    add_output(man, o.out_dir, "diagnose_summary.json");
    finish_manifest(man, o.out_dir);
    std::cout << "diagnose: residual violations " << rep.violation_fraction * 100.0 << "%\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic gravity-current spectral simulator"};
    app.require_subcommand(1);

    CommonOpts o_sim, o_check, o_ens, o_sync, o_erg, o_pull, o_diag;

    auto* sim = app.add_subcommand("simulate", "run one trajectory");
    add_common(sim, o_sim);
    std::string resume;
    int64_t start_step = 0;
    bool no_final = false;
    sim->add_option("--resume", resume, "resume from a GCUR snapshot");
    sim->add_option("--start-step", start_step,
                    "absolute step index of the run start (noise continuity)");
    sim->add_flag("--no-final-snapshot", no_final, "skip writing final_state.gcur");

    auto* chk = app.add_subcommand("check",
                                   "print dissipativity margin, trace and Poincare constants");
    add_common(chk, o_check);

    auto* ens = app.add_subcommand("ensemble", "run replicate ensemble statistics");
    add_common(ens, o_ens);
    int ens_m = 8;
    double ens_horizon = 20.0, ens_burn = 5.0;
    ens->add_option("--M", ens_m, "replicate count");
    ens->add_option("--horizon", ens_horizon, "time horizon");
    ens->add_option("--burn-in", ens_burn, "plateau burn-in");

    auto* syn = app.add_subcommand("sync", "two-trajectory synchronization test");
    add_common(syn, o_sync);
    int sync_seeds = 10;
    double sync_horizon = 10.0, sync_delta = 0.1;
    syn->add_option("--seeds", sync_seeds, "number of noise realizations");
    syn->add_option("--horizon", sync_horizon, "fit horizon");
    syn->add_option("--delta", sync_delta, "H-norm of the initial perturbation");

    auto* erg = app.add_subcommand("ergodicity", "time average vs ensemble average gap");
    add_common(erg, o_erg);
    double erg_tlong = 200.0, erg_tobs = 20.0, erg_burn = 10.0;
    int erg_m = 64, erg_batches = 20;
    erg->add_option("--t-long", erg_tlong, "single-path horizon");
    erg->add_option("--t-obs", erg_tobs, "ensemble observation time");
    erg->add_option("--burn-in", erg_burn, "discarded transient");
    erg->add_option("--M", erg_m, "ensemble size");
    erg->add_option("--batches", erg_batches, "batch-means batch count");

    auto* pull = app.add_subcommand("pullback", "pullback convergence probe");
    add_common(pull, o_pull);
    std::vector<double> pull_windows;
    double pull_tol = 1e-6;
    bool pull_two = false;
    pull->add_option("--windows", pull_windows, "ascending window lengths")->delimiter(',');
    pull->add_option("--tol", pull_tol, "convergence tolerance");
    pull->add_flag("--two-ic", pull_two, "also compare two initial conditions");

    auto* diag = app.add_subcommand("diagnose", "post-process a diagnostics CSV");
    add_common(diag, o_diag);
    std::string diag_csv;
    double diag_radius = 0.0;
    diag->add_option("--csv", diag_csv, "diagnostics.csv path")->required();
    diag->add_option("--radius", diag_radius, "absorbing-ball radius to check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (sim->parsed()) return cmd_simulate(o_sim, resume, start_step, !no_final);
        if (chk->parsed()) return cmd_check(o_check);
        if (ens->parsed()) return cmd_ensemble(o_ens, ens_m, ens_horizon, ens_burn);
        if (syn->parsed()) return cmd_sync(o_sync, sync_seeds, sync_horizon, sync_delta);
        if (erg->parsed())
            return cmd_ergodicity(o_erg, erg_tlong, erg_m, erg_tobs, erg_burn, erg_batches);
        if (pull->parsed()) return cmd_pullback(o_pull, pull_windows, pull_tol, pull_two);
        if (diag->parsed()) return cmd_diagnose(o_diag, diag_csv, diag_radius);
    } catch (const CflViolation& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const BlowUp& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
