#pragma once

#include "gcur/transforms.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace gcur {

inline constexpr double kPi = 3.14159265358979323846;

/// Scalar field on the unit square stored as orthonormal sine/cosine
/// coefficients, one basis per axis. Vorticity and streamfunction live in
/// (Sine,Sine); salinity and the boundary homogenizer in (Cosine,Cosine).
/// Grid views use the shared cell-centered collocation grid of size
/// (2*nx) x (2*nz), on which both bases are exactly orthogonal and products
/// of resolved fields are dealiased.
class SpectralField {
public:
    SpectralField(int nx, int nz, Basis1D bx, Basis1D bz)
        : nx_(nx), nz_(nz), bx_(bx), bz_(bz), a_(size_t(nx) * nz, 0.0) {
        if (nx < 1 || nz < 1) throw std::invalid_argument("SpectralField: mode counts must be >= 1");
    }

    /// Sine-sine field (q = psi = 0 on the boundary).
    static SpectralField dirichlet(int nx, int nz) {
        return SpectralField(nx, nz, Basis1D::Sine, Basis1D::Sine);
    }
    /// Cosine-cosine field (homogeneous Neumann data).
    static SpectralField neumann(int nx, int nz) {
        return SpectralField(nx, nz, Basis1D::Cosine, Basis1D::Cosine);
    }

    int nx() const { return nx_; }
    int nz() const { return nz_; }
    int ngx() const { return 2 * nx_; }
    int ngz() const { return 2 * nz_; }
    Basis1D basis_x() const { return bx_; }
    Basis1D basis_z() const { return bz_; }

    /// x mode number at storage index i (Sine: i+1, Cosine: i).
    int mode_m(int i) const { return bx_ == Basis1D::Sine ? i + 1 : i; }
    int mode_k(int j) const { return bz_ == Basis1D::Sine ? j + 1 : j; }

    /// -Laplacian eigenvalue of the (i,j) storage slot: (m^2+k^2)*pi^2.
    double mu(int i, int j) const {
        const double m = mode_m(i), k = mode_k(j);
        return (m * m + k * k) * kPi * kPi;
    }

    double coef(int i, int j) const { return a_[size_t(i) * nz_ + j]; }
    double& coef(int i, int j) { return a_[size_t(i) * nz_ + j]; }
    std::span<const double> coeffs() const { return a_; }
    std::span<double> coeffs() { return a_; }

    bool same_layout(const SpectralField& o) const {
        return nx_ == o.nx_ && nz_ == o.nz_ && bx_ == o.bx_ && bz_ == o.bz_;
    }

    /// Zero the spatial-mean slot. Only meaningful for cosine-cosine fields.
    void enforce_zero_mean() {
        if (bx_ == Basis1D::Cosine && bz_ == Basis1D::Cosine) a_[0] = 0.0;
    }

    /// Integral over the unit square from the analytic mode integrals
    /// (cosine axis: only m = 0 contributes; sine axis: odd modes).
    double integral() const;

    double l2_norm_sq() const {
        double s = 0.0;
        for (double c : a_) s += c * c;
        return s;
    }
    /// Integral of |grad|^2 via Parseval: sum mu_mk * a_mk^2.
    double grad_norm_sq() const {
        double s = 0.0;
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < nz_; ++j) s += mu(i, j) * coef(i, j) * coef(i, j);
        return s;
    }

    /// Collocation-grid values, x-major: g[i*ngz + j] at ((i+.5)/ngx, (j+.5)/ngz).
    std::vector<double> grid_values() const {
        std::vector<double> g(size_t(ngx()) * ngz());
        fft::to_grid(a_, nx_, nz_, bx_, bz_, g, ngx(), ngz());
        return g;
    }
    void grid_values(std::span<double> out) const {
        fft::to_grid(a_, nx_, nz_, bx_, bz_, out, ngx(), ngz());
    }
    /// Replace coefficients by the projection of grid values.
    void from_grid(std::span<const double> g) {
        fft::to_spectral(g, ngx(), ngz(), bx_, bz_, a_, nx_, nz_);
    }

    /// Point evaluation by direct basis summation (slow; oracles and tests).
    double eval_at(double x, double z) const;

    SpectralField& operator+=(const SpectralField& o) {
        require_same(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        require_same(o);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    SpectralField& operator*=(double c) {
        for (double& v : a_) v *= c;
        return *this;
    }

private:
    void require_same(const SpectralField& o) const {
        if (!same_layout(o)) throw std::invalid_argument("SpectralField: layout mismatch");
    }

    int nx_, nz_;
    Basis1D bx_, bz_;
    std::vector<double> a_;
};

/// Pr > 0, Ra >= 0 (nondimensional control parameters).
struct PhysicalParams {
    double Pr = 1.0;
    double Ra = 1.0;

    void validate() const {
        if (!(Pr > 0.0)) throw std::invalid_argument("Pr must be > 0");
        if (!(Ra >= 0.0)) throw std::invalid_argument("Ra must be >= 0");
    }
};

/// Phase-space point u = (q, S): vorticity in the sine basis, salinity in the
/// zero-mean cosine basis.
struct StateU {
    SpectralField q;
    SpectralField S;

    StateU(int nx, int nz)
        : q(SpectralField::dirichlet(nx, nz)), S(SpectralField::neumann(nx, nz)) {}
    StateU(SpectralField q_, SpectralField S_) : q(std::move(q_)), S(std::move(S_)) {
        if (q.basis_x() != Basis1D::Sine || q.basis_z() != Basis1D::Sine)
            throw std::invalid_argument("StateU: q must be sine-sine");
        if (S.basis_x() != Basis1D::Cosine || S.basis_z() != Basis1D::Cosine)
            throw std::invalid_argument("StateU: S must be cosine-cosine");
        S.enforce_zero_mean();
    }

    int nx() const { return q.nx(); }
    int nz() const { return q.nz(); }

    double h_norm_sq() const { return q.l2_norm_sq() + S.l2_norm_sq(); }
    double v_norm_sq() const { return q.grad_norm_sq() + S.grad_norm_sq(); }
    double enstrophy() const { return 0.5 * q.l2_norm_sq(); }
    double salinity_integral() const { return S.coef(0, 0); }
};

/// First Dirichlet / zero-mean-Neumann eigenvalues of -Laplacian on the unit
/// square give the optimal constants in lambda*||u|| <= ||grad u||.
struct PoincareConstants {
    double lambda1;  // sqrt(2)*pi, Dirichlet fields
    double lambda2;  // pi, zero-mean Neumann fields
};

/// Analytic constants plus a verification routine that minimizes
/// ||grad e||/||e|| over the resolved basis modes.
PoincareConstants poincare_constants(int nx, int nz);

/// Smallest ||grad e||/||e|| over basis modes; for Cosine the (0,0) mode is
/// excluded (zero-mean subspace).
double min_gradient_ratio(int nx, int nz, Basis1D bx, Basis1D bz);

} // namespace gcur
