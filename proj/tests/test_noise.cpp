#include "doctest.h"

#include "gcur/noise.hpp"

#include <cmath>

using namespace gcur;

TEST_CASE("philox matches the reference known-answer vectors") {
    // Salmon et al., Random123 kat_vectors: philox4x32-10.
    auto zero = rng::philox4x32(0, 0, 0, 0, 0, 0);
    CHECK(zero.w[0] == 0x6627e8d5u);
    CHECK(zero.w[1] == 0xe169c58du);
    CHECK(zero.w[2] == 0xbc57ac4cu);
    CHECK(zero.w[3] == 0x9b00dbd8u);
    auto ones = rng::philox4x32(0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu,
                                0xffffffffu, 0xffffffffu);
    CHECK(ones.w[0] == 0x408f276du);
    CHECK(ones.w[1] == 0x41c83b0eu);
    CHECK(ones.w[2] == 0xa20bc7c6u);
    CHECK(ones.w[3] == 0x6d5451fdu);
}

TEST_CASE("paths are bit-identical for identical keys and windows") {
    CovarianceSpec cov = CovarianceSpec::power_law(8, 1.0, 1.0, 0.0);
    NoisePath a = sample_path(cov, 1e-3, -0.25, 700, 42, 3);
    NoisePath b = sample_path(cov, 1e-3, -0.25, 700, 42, 3);
    for (int64_t s = 0; s < a.n_steps(); s += 97)
        for (int k = 1; k <= 8; ++k) CHECK(a.increment(s, k) == b.increment(s, k));
    NoisePath c = sample_path(cov, 1e-3, -0.25, 700, 42, 4);
    CHECK(a.increment(0, 1) != c.increment(0, 1));
}

TEST_CASE("increment sample mean and variance match N(0, dt)") {
    const double dt = 1e-3;
    const int64_t n = 100000;
    CovarianceSpec cov = CovarianceSpec::power_law(1, 1.0, 1.0, 0.0);
    NoisePath p = sample_path(cov, dt, 0.0, n, 2024, 0);
    double mean = 0.0, var = 0.0;
    for (int64_t s = 0; s < n; ++s) mean += p.increment(s, 1);
    mean /= double(n);
    for (int64_t s = 0; s < n; ++s) {
        const double d = p.increment(s, 1) - mean;
        var += d * d;
    }
    var /= double(n - 1);
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(dt / double(n)));
    CHECK(var == doctest::Approx(dt).epsilon(0.05));
}

TEST_CASE("wiener shift is a flow and re-indexes increments") {
    CovarianceSpec cov = CovarianceSpec::power_law(4, 0.5, 1.0, 0.0);
    NoisePath p = sample_path(cov, 0.01, -1.0, 300, 99, 0);

    NoisePath p0 = p.wiener_shift(0.0);
    CHECK(p0.increment(17, 2) == p.increment(17, 2));

    NoisePath ps = p.wiener_shift(0.13);
    for (int64_t s : {0l, 5l, 50l})
        for (int k = 1; k <= 4; ++k) CHECK(ps.increment(s, k) == p.increment(s + 13, k));

    NoisePath back = ps.wiener_shift(-0.13);
    CHECK(back.increment(100, 3) == p.increment(100, 3));

    NoisePath two = p.wiener_shift(0.05).wiener_shift(0.08);
    CHECK(two.increment(7, 1) == ps.increment(7, 1));
}

TEST_CASE("trace of the covariance") {
    CovarianceSpec zero = CovarianceSpec::power_law(16, 0.0, 1.0, 0.0);
    CHECK(zero.trace() == 0.0);

    CovarianceSpec flat;
    flat.q.assign(16, 0.0);
    for (int k = 0; k < 5; ++k) flat.q[k] = 0.3;
    CHECK(flat.trace() == doctest::Approx(1.5).epsilon(1e-14));

    // q_k = k^-2 truncated at K = 1e4 is within 1e-4 of pi^2/6.
    CovarianceSpec series = CovarianceSpec::power_law(10000, 1.0, 1.0, 0.0);
    const double pi = 3.14159265358979323846;
    CHECK(std::abs(series.trace() - pi * pi / 6.0) <= 1e-4);
}

TEST_CASE("flux at the boundary combines mean flux and scaled increments") {
    CovarianceSpec cov;
    cov.q = {4.0, 0.0};
    cov.f = {0.0, 0.0};
    NoisePath p = sample_path(cov, 0.01, 0.0, 10, 5, 0);
    auto g = flux_at_boundary(cov, p, 3);
    CHECK(g[0] == doctest::Approx(2.0 * p.increment(3, 1)).epsilon(1e-15));
    CHECK(g[1] == 0.0);

    CovarianceSpec det;
    det.q = {0.0};
    det.f = {1.0};
    NoisePath pz = sample_path(det, 0.01, 0.0, 10, 5, 0);
    auto gd = flux_at_boundary(det, pz, 0);
    CHECK(gd[0] == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("empirical covariance of the reconstructed noise approaches the kernel") {
    CovarianceSpec cov;
    cov.q = {1.0, 0.5, 0.25};
    cov.f = {0.0, 0.0, 0.0};
    const double dt = 0.1;
    const int reps = 20000;
    const double z1 = 0.3, z2 = 0.8;
    double c12 = 0.0;
    for (int r = 0; r < reps; ++r) {
        NoisePath p = sample_path(cov, dt, 0.0, 1, 777, uint32_t(r));
        double w1 = 0.0, w2 = 0.0;
        for (int k = 1; k <= 3; ++k) {
            const double ek1 = std::sqrt(2.0) * std::cos(k * 3.14159265358979323846 * z1);
            const double ek2 = std::sqrt(2.0) * std::cos(k * 3.14159265358979323846 * z2);
            const double amp = std::sqrt(cov.q[k - 1]) * p.increment(0, k);
            w1 += amp * ek1;
            w2 += amp * ek2;
        }
        c12 += w1 * w2;
    }
    c12 /= double(reps) * dt;
    // Monte Carlo error ~ 1/sqrt(reps); allow 5 sigma.
    CHECK(std::abs(c12 - cov.kernel(z1, z2)) <= 5.0 * 2.0 / std::sqrt(double(reps)));
}

TEST_CASE("coarsened path sums fine increments and aligns windows") {
    CovarianceSpec cov = CovarianceSpec::power_law(2, 1.0, 1.0, 0.0);
    NoisePath fine = sample_path(cov, 0.005, 0.0, 40, 8, 0);
    NoisePath coarse = fine.coarsen(4);
    CHECK(coarse.dt() == doctest::Approx(0.02));
    CHECK(coarse.n_steps() == 10);
    double sum = 0.0;
    for (int s = 0; s < 4; ++s) sum += fine.increment(s, 1);
    CHECK(coarse.increment(0, 1) == doctest::Approx(sum).epsilon(1e-15));
    CHECK_THROWS(coarse.with_window(0.0, 100));
}
