#include "gcur/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gcur {

DiagnosticsRecord record(const StateU& u, const SpectralField* eta1,
                         const PhysicalParams& params, const PoincareConstants& pc, double t) {
    DiagnosticsRecord r;
    r.t = t;
    r.enstrophy = u.enstrophy();
    r.ms_salinity = u.S.l2_norm_sq();
    r.h_norm_sq = u.h_norm_sq();
    r.v_norm_sq = u.v_norm_sq();
    r.salinity_integral = u.salinity_integral();
    r.grad_q_sq = u.q.grad_norm_sq();

    SpectralField vtilde = u.S;
    if (eta1) {
        vtilde -= *eta1;
        r.eta_norm_sq = eta1->l2_norm_sq();
    }
    r.grad_vtilde_sq = vtilde.grad_norm_sq();
    const double vt2 = vtilde.l2_norm_sq();
    if (params.Ra == 0.0) {
        r.lyapunov = 2.0 * vt2;
        r.ra_term_omitted = true;
    } else {
        r.lyapunov =
            2.0 * vt2 + u.q.l2_norm_sq() / (params.Ra * params.Ra * pc.lambda2 * pc.lambda2);
    }
    return r;
}

std::vector<double> energy_residual(std::span<const DiagnosticsRecord> window,
                                    const PhysicalParams& params, const PoincareConstants& pc) {
    if (window.size() < 2)
        throw std::invalid_argument("energy_residual: window must have at least 2 records");
    const double l1 = pc.lambda1, l2 = pc.lambda2;
    const double coef_q = params.Ra == 0.0 ? 0.0 : 1.0 / (params.Ra * params.Ra * l2 * l2);
    std::vector<double> r(window.size(), 0.0);
    for (size_t i = 1; i < window.size(); ++i) {
        const auto& a = window[i - 1];
        const auto& b = window[i];
        const double dt = b.t - a.t;
        r[i] = (b.lyapunov - a.lyapunov) / dt + a.grad_vtilde_sq +
               (coef_q - 2.0 * l1 * l1 * a.eta_norm_sq) * a.grad_q_sq -
               a.eta_norm_sq / (l2 * l2);
    }
    return r;
}

ResidualReport energy_residual_report(std::span<const DiagnosticsRecord> window,
                                      const PhysicalParams& params, const PoincareConstants& pc,
                                      double dt, double tol_factor) {
    ResidualReport rep;
    rep.residual = energy_residual(window, params, pc);
    const double l1 = pc.lambda1, l2 = pc.lambda2;
    const double coef_q = params.Ra == 0.0 ? 0.0 : 1.0 / (params.Ra * params.Ra * l2 * l2);
    for (size_t i = 1; i < window.size(); ++i) {
        const auto& a = window[i - 1];
        const auto& b = window[i];
        const double scale = std::abs((b.lyapunov - a.lyapunov) / (b.t - a.t)) +
                             a.grad_vtilde_sq +
                             (coef_q + 2.0 * l1 * l1 * a.eta_norm_sq) * a.grad_q_sq +
                             a.eta_norm_sq / (l2 * l2);
        if (rep.residual[i] > tol_factor * dt * scale) ++rep.violations;
    }
    rep.violation_fraction = double(rep.violations) / double(window.size() - 1);
    return rep;
}

AbsorbingEntry absorbing_check(std::span<const DiagnosticsRecord> traj, double radius,
                               double band) {
    AbsorbingEntry e;
    const double cap = radius * (1.0 + band);
    for (const auto& r : traj) {
        if (!e.entered) {
            if (r.lyapunov <= radius) {
                e.entered = true;
                e.stayed = true;
                e.entry_time = r.t;
                e.max_after_entry = r.lyapunov;
            }
        } else {
            e.max_after_entry = std::max(e.max_after_entry, r.lyapunov);
            if (r.lyapunov > cap) e.stayed = false;
        }
    }
    return e;
}

namespace {
void put(std::ostream& os, double v, bool last) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << (last ? '\n' : ',');
}
} // namespace

void write_csv(std::ostream& os, std::span<const DiagnosticsRecord> records) {
    os << "t,enstrophy,ms_salinity,h_norm_sq,v_norm_sq,salinity_integral,lyapunov,"
          "eta_norm_sq,energy_residual\n";
    for (const auto& r : records) {
        put(os, r.t, false);
        put(os, r.enstrophy, false);
        put(os, r.ms_salinity, false);
        put(os, r.h_norm_sq, false);
        put(os, r.v_norm_sq, false);
        put(os, r.salinity_integral, false);
        put(os, r.lyapunov, false);
        put(os, r.eta_norm_sq, false);
        put(os, r.energy_residual, true);
    }
}

std::vector<DiagnosticsRecord> read_csv(std::istream& is) {
    std::vector<DiagnosticsRecord> out;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("diagnostics csv: empty file");
    if (line.rfind("t,enstrophy", 0) != 0)
        throw std::runtime_error("diagnostics csv: unexpected header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        DiagnosticsRecord r;
        char comma;
        ss >> r.t >> comma >> r.enstrophy >> comma >> r.ms_salinity >> comma >> r.h_norm_sq >>
            comma >> r.v_norm_sq >> comma >> r.salinity_integral >> comma >> r.lyapunov >>
            comma >> r.eta_norm_sq >> comma >> r.energy_residual;
        if (ss.fail()) throw std::runtime_error("diagnostics csv: malformed row");
        out.push_back(r);
    }
    return out;
}

} // namespace gcur
