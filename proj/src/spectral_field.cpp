#include "gcur/spectral_field.hpp"

#include <limits>

namespace gcur {

namespace {

double basis_eval(Basis1D b, int m, double x) {
    if (b == Basis1D::Sine) return std::sqrt(2.0) * std::sin(m * kPi * x);
    return m == 0 ? 1.0 : std::sqrt(2.0) * std::cos(m * kPi * x);
}

double basis_integral(Basis1D b, int m) {
    if (b == Basis1D::Cosine) return m == 0 ? 1.0 : 0.0;
    // int_0^1 sqrt(2) sin(m pi x) dx
    return (m % 2 == 1) ? 2.0 * std::sqrt(2.0) / (m * kPi) : 0.0;
}

} // namespace

double SpectralField::integral() const {
    double s = 0.0;
    for (int i = 0; i < nx_; ++i) {
        const double ix = basis_integral(bx_, mode_m(i));
        if (ix == 0.0) continue;
        for (int j = 0; j < nz_; ++j) {
            const double iz = basis_integral(bz_, mode_k(j));
            if (iz != 0.0) s += coef(i, j) * ix * iz;
        }
    }
    return s;
}

double SpectralField::eval_at(double x, double z) const {
    double s = 0.0;
    for (int i = 0; i < nx_; ++i) {
        const double fx = basis_eval(bx_, mode_m(i), x);
        double row = 0.0;
        for (int j = 0; j < nz_; ++j) row += coef(i, j) * basis_eval(bz_, mode_k(j), z);
        s += fx * row;
    }
    return s;
}

double min_gradient_ratio(int nx, int nz, Basis1D bx, Basis1D bz) {
    SpectralField probe(nx, nz, bx, bz);
    double best = std::numeric_limits<double>::infinity();
    const bool neumann = bx == Basis1D::Cosine && bz == Basis1D::Cosine;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nz; ++j) {
            if (neumann && i == 0 && j == 0) continue;  // zero-mean subspace
            const double ratio = std::sqrt(probe.mu(i, j));
            if (ratio < best) best = ratio;
        }
    }
    return best;
}

PoincareConstants poincare_constants(int nx, int nz) {
    if (nx < 1 || nz < 1) throw std::invalid_argument("poincare_constants: mode counts must be >= 1");
    return PoincareConstants{std::sqrt(2.0) * kPi, kPi};
}

} // namespace gcur
