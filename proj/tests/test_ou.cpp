#include "doctest.h"

#include "gcur/operators.hpp"
#include "gcur/ou_process.hpp"

#include <cmath>
#include <vector>

using namespace gcur;

TEST_CASE("neumann map closed form for single cosine fluxes") {
    // g = cos(k pi z)  ->  h = -cosh(k pi (1-x)) cos(k pi z) / (k pi sinh(k pi))
    const int nx = 48, nz = 48;
    for (int k = 1; k <= 4; ++k) {
        std::vector<double> flux(k + 1, 0.0);
        flux[k] = 1.0 / std::sqrt(2.0);  // cos(k pi z) against sqrt(2)cos modes
        SpectralField h = neumann_map(flux, nx, nz);
        double max_err = 0.0;
        for (double x : {0.07, 0.33, 0.71, 0.96}) {
            for (double z : {0.12, 0.55, 0.88}) {
                const double want = -std::cosh(k * kPi * (1.0 - x)) * std::cos(k * kPi * z) /
                                    (k * kPi * std::sinh(k * kPi));
                max_err = std::max(max_err, std::abs(h.eval_at(x, z) - want));
            }
        }
        // The resolved-band coefficients match the analytic expansion of the
        // closed form exactly; pointwise values carry the O(1/nx) cosine-series
        // truncation tail of cosh.
        for (int m = 0; m < 6; ++m) {
            const double mu = (double(m) * m + double(k) * k) * kPi * kPi;
            const double want_c = -boundary_coupling(m) * flux[k] / mu;
            CHECK(h.coef(m, k) == doctest::Approx(want_c).epsilon(1e-14));
        }
        CHECK(max_err <= 1e-3);
    }
    // Zero flux maps to zero.
    std::vector<double> zero(5, 0.0);
    CHECK(neumann_map(zero, nx, nz).l2_norm_sq() == 0.0);
    // Nonzero mean flux is rejected.
    std::vector<double> bad = {1.0, 0.0};
    CHECK_THROWS(neumann_map(bad, nx, nz));
}

TEST_CASE("neumann map output is discretely harmonic with the right flux") {
    // Laplacian of the coefficient field vanishes against interior modes by
    // construction only in the weak sense: mu_mk * h_mk equals the boundary
    // forcing row, which is exactly -gamma_m g_k.
    const int nx = 32, nz = 32;
    std::vector<double> flux(nz, 0.0);
    for (int k = 1; k < nz; ++k) flux[k] = 1.0 / (k * k);
    SpectralField h = neumann_map(flux, nx, nz);
    for (int m = 0; m < nx; ++m)
        for (int k = 1; k < nz; ++k)
            CHECK(h.mu(m, k) * h.coef(m, k) ==
                  doctest::Approx(-boundary_coupling(m) * flux[k]).epsilon(1e-12));
}

TEST_CASE("zero-noise OU step is the exact heat semigroup") {
    const int nx = 12, nz = 12;
    CovarianceSpec cov = CovarianceSpec::power_law(4, 0.0, 1.0, 0.0);
    NoisePath path = sample_path(cov, 0.05, 0.0, 4, 1, 0);
    OuState s = OuState::zero(nx, nz);
    s.eta1.coef(2, 3) = 1.0;  // e_{mk}
    OuState s1 = ou_exact_step(s, cov, path, 0, 0.05);
    const double mu = s.eta1.mu(2, 3);
    CHECK(s1.eta1.coef(2, 3) == doctest::Approx(std::exp(-mu * 0.05)).epsilon(1e-14));
    CHECK(s1.t == doctest::Approx(0.05));
}

TEST_CASE("zero-noise constant-flux OU converges to the Neumann map") {
    const int nx = 24, nz = 24;
    CovarianceSpec cov;
    cov.q = {0.0};
    cov.f = {0.7};
    const double dt = 1e-3;
    const double mu_min = kPi * kPi;
    OuTransition tr(nx, nz, dt, cov);
    NoisePath path = sample_path(cov, dt, 0.0, int64_t(20.0 / dt), 1, 0);
    OuState s = OuState::zero(nx, nz);

    std::vector<double> flux = {0.0, 0.7};
    SpectralField hf = neumann_map(flux, nx, nz);
    const double hn = std::sqrt(hf.l2_norm_sq());

    auto rel_err = [&](const OuState& st) {
        SpectralField d = st.eta1;
        d -= hf;
        return std::sqrt(d.l2_norm_sq()) / hn;
    };

    int64_t step = 0;
    const int64_t n10 = int64_t(std::llround(10.0 / mu_min / dt));
    for (; step < n10; ++step) s = tr.step(s, path, step);
    // At t = 10/mu_min the slowest mode still carries e^{-10} of its start.
    CHECK(rel_err(s) <= 1.1 * std::exp(-10.0));
    CHECK(rel_err(s) >= 0.1 * std::exp(-10.0));
    const int64_t n15 = int64_t(std::llround(15.0 / mu_min / dt));
    for (; step < n15; ++step) s = tr.step(s, path, step);
    CHECK(rel_err(s) <= 1e-6);
}

TEST_CASE("stationary statistics: closed forms and degenerate cases") {
    const int nx = 16, nz = 16;
    CovarianceSpec off = CovarianceSpec::power_law(4, 0.0, 1.0, 0.0);
    CHECK(stationary_stats(off, nx, nz).expected_norm_sq == 0.0);

    CovarianceSpec fo;  // F = cos(pi z), Q = 0
    fo.q = {0.0};
    fo.f = {1.0 / std::sqrt(2.0)};
    OuStationaryStats st = stationary_stats(fo, nx, nz);
    std::vector<double> flux = {0.0, 1.0 / std::sqrt(2.0)};
    CHECK(st.expected_norm_sq ==
          doctest::Approx(neumann_map(flux, nx, nz).l2_norm_sq()).epsilon(1e-14));

    CovarianceSpec qo = CovarianceSpec::power_law(3, 0.02, 1.0, 0.0);
    OuStationaryStats st2 = stationary_stats(qo, nx, nz);
    // v_mk = gamma_m^2 q_k / (2 mu_mk)
    const double v01 = st2.variance(0, 1, nz);
    CHECK(v01 == doctest::Approx(0.02 / (2.0 * kPi * kPi)).epsilon(1e-14));
    const double v11 = st2.variance(1, 1, nz);
    CHECK(v11 == doctest::Approx(2.0 * 0.02 / (2.0 * 2.0 * kPi * kPi)).epsilon(1e-14));
}

TEST_CASE("single-mode Monte Carlo variance matches the analytic law") {
    const int nx = 8, nz = 8;
    CovarianceSpec cov;
    cov.q = {0.5};
    cov.f = {0.0};
    const double dt = 2e-3;
    const int64_t n = 200000;
    OuTransition tr(nx, nz, dt, cov);
    NoisePath path = sample_path(cov, dt, 0.0, n, 31337, 0);
    OuState s = ou_stationary_draw(cov, nx, nz, 31337, 0, 0.0);
    double s2_01 = 0.0, s2_11 = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        s = tr.step(s, path, i);
        s2_01 += s.eta1.coef(0, 1) * s.eta1.coef(0, 1);
        s2_11 += s.eta1.coef(1, 1) * s.eta1.coef(1, 1);
    }
    OuStationaryStats st = stationary_stats(cov, nx, nz);
    CHECK(s2_01 / double(n) == doctest::Approx(st.variance(0, 1, nz)).epsilon(0.05));
    CHECK(s2_11 / double(n) == doctest::Approx(st.variance(1, 1, nz)).epsilon(0.05));
}

TEST_CASE("dissipativity margin: closed form, monotonicity, Ra = 0") {
    const int nx = 32, nz = 32;
    auto pc = poincare_constants(nx, nz);
    CovarianceSpec off = CovarianceSpec::power_law(4, 0.0, 1.0, 0.0);
    const double m1 = dissipativity_margin(PhysicalParams{1.0, 1.0}, off, pc, nx, nz);
    CHECK(m1 == doctest::Approx(1.0 / (kPi * kPi)).epsilon(1e-12));

    CovarianceSpec cov = CovarianceSpec::power_law(8, 1e-3, 1.0, 0.05);
    double prev = dissipativity_margin(PhysicalParams{1.0, 0.5}, cov, pc, nx, nz);
    for (double ra : {1.0, 2.0, 4.0}) {
        const double m = dissipativity_margin(PhysicalParams{1.0, ra}, cov, pc, nx, nz);
        CHECK(m < prev);
        prev = m;
    }
    CHECK(std::isinf(dissipativity_margin(PhysicalParams{1.0, 0.0}, cov, pc, nx, nz)));
}

TEST_CASE("absorbing radius: trivial and constant cases") {
    const int nx = 8, nz = 8;
    const double lambda2 = kPi;
    CovarianceSpec off = CovarianceSpec::power_law(2, 0.0, 1.0, 0.0);
    NoisePath p = sample_path(off, 0.01, 0.0, 1, 7, 0);
    AbsorbingRadius r0 = absorbing_radius(off, p, 2.0, 4.0, nx, nz, lambda2);
    CHECK(r0.radius <= 1e-14);

    // Constant flux F: eta converges to h_F, so ||eta1||^2 is ~constant = c and
    // R1 -> 2c(1 - e^{-aT})/(a lambda2^2).
    CovarianceSpec fo;
    fo.q = {0.0};
    fo.f = {0.4};
    std::vector<double> flux = {0.0, 0.4};
    const double c = neumann_map(flux, nx, nz).l2_norm_sq();
    NoisePath pf = sample_path(fo, 0.01, 0.0, 1, 7, 0);
    const double alpha = 2.0, T = 4.0;
    AbsorbingRadius rc = absorbing_radius(fo, pf, alpha, T, nx, nz, lambda2, 3.0);
    const double want = 2.0 * c * (1.0 - std::exp(-alpha * T)) / (alpha * lambda2 * lambda2);
    CHECK(rc.radius == doctest::Approx(want).epsilon(1e-3));
    CHECK(rc.tail_bound <= 2.0 * std::exp(-alpha * T) * c * 1.01 / (alpha * lambda2 * lambda2));
}

TEST_CASE("absorbing radius quadrature refines at first order") {
    const int nx = 8, nz = 8;
    CovarianceSpec cov = CovarianceSpec::power_law(3, 0.05, 1.0, 0.1);
    double prev_r = 0.0;
    std::vector<double> rs;
    for (double dt : {0.02, 0.01, 0.005}) {
        NoisePath p = sample_path(cov, dt, 0.0, 1, 11, 0);
        rs.push_back(absorbing_radius(cov, p, 1.5, 3.0, nx, nz, kPi, 2.0).radius);
        (void)prev_r;
    }
    // Values settle: successive differences shrink (the paths differ per dt, so
    // this is a stability check rather than strict Richardson).
    CHECK(std::abs(rs[2] - rs[1]) <= std::abs(rs[1] - rs[0]) + 0.2 * std::abs(rs[1]));
}
