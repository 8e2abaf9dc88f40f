#include "gcur/operators.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace gcur {

SpectralField solve_streamfunction(const SpectralField& q) {
    if (q.basis_x() != Basis1D::Sine || q.basis_z() != Basis1D::Sine)
        throw std::invalid_argument("solve_streamfunction: q must be sine-sine");
    SpectralField psi = q;
    for (int i = 0; i < q.nx(); ++i)
        for (int j = 0; j < q.nz(); ++j) psi.coef(i, j) = q.coef(i, j) / q.mu(i, j);
    return psi;
}

namespace {

// Grid array padded with one ghost layer per side, filled by parity
// reflection: cell-centered grids are symmetric about x = 0 and x = 1, so the
// mirror of interior cell 0 is ghost cell -1 (sign -1 for sine, +1 for
// cosine), and likewise at the far side.
class Padded {
public:
    Padded(std::span<const double> g, int ngx, int ngz, Basis1D bx, Basis1D bz)
        : ngz2_(ngz + 2), v_(size_t(ngx + 2) * (ngz + 2)) {
        const double sx = bx == Basis1D::Sine ? -1.0 : 1.0;
        const double sz = bz == Basis1D::Sine ? -1.0 : 1.0;
        for (int i = 0; i < ngx; ++i)
            for (int j = 0; j < ngz; ++j) at(i, j) = g[size_t(i) * ngz + j];
        for (int j = 0; j < ngz; ++j) {
            at(-1, j) = sx * at(0, j);
            at(ngx, j) = sx * at(ngx - 1, j);
        }
        for (int i = -1; i <= ngx; ++i) {
            at(i, -1) = sz * at(i, 0);
            at(i, ngz) = sz * at(i, ngz - 1);
        }
    }
    double operator()(int i, int j) const { return v_[size_t(i + 1) * ngz2_ + (j + 1)]; }
    /// Pointer to interior column j = 0 of (ghosted) row i; valid offsets
    /// are -1..ngz.
    const double* row(int i) const { return v_.data() + size_t(i + 1) * ngz2_ + 1; }

private:
    double& at(int i, int j) { return v_[size_t(i + 1) * ngz2_ + (j + 1)]; }
    int ngz2_;
    std::vector<double> v_;
};

} // namespace

namespace detail {

void arakawa_grid(std::span<const double> av, Basis1D ax, Basis1D az,
                  std::span<const double> bv, Basis1D bx, Basis1D bz, int ngx, int ngz,
                  std::span<double> out) {
    Padded a(av, ngx, ngz, ax, az);
    Padded b(bv, ngx, ngz, bx, bz);
    const double hx = 1.0 / ngx, hz = 1.0 / ngz;
    const double fac = 1.0 / (12.0 * hx * hz);  // 1/(4 hx hz) / 3
    for (int i = 0; i < ngx; ++i) {
        // Row pointers at the j = 0 interior column; j offsets are +-1.
        const double* am = a.row(i - 1);
        const double* a0 = a.row(i);
        const double* ap = a.row(i + 1);
        const double* bm = b.row(i - 1);
        const double* b0 = b.row(i);
        const double* bp = b.row(i + 1);
        double* o = out.data() + size_t(i) * ngz;
        for (int j = 0; j < ngz; ++j) {
            const double j1 = (ap[j] - am[j]) * (b0[j + 1] - b0[j - 1]) -
                              (a0[j + 1] - a0[j - 1]) * (bp[j] - bm[j]);
            const double j2 = ap[j] * (bp[j + 1] - bp[j - 1]) - am[j] * (bm[j + 1] - bm[j - 1]) -
                              a0[j + 1] * (bp[j + 1] - bm[j + 1]) +
                              a0[j - 1] * (bp[j - 1] - bm[j - 1]);
            const double j3 = ap[j + 1] * (b0[j + 1] - bp[j]) - am[j - 1] * (bm[j] - b0[j - 1]) -
                              am[j + 1] * (b0[j + 1] - bm[j]) + ap[j - 1] * (bp[j] - b0[j - 1]);
            o[j] = fac * (j1 + j2 + j3);
        }
    }
}

} // namespace detail

SpectralField jacobian(const SpectralField& g, const SpectralField& h) {
    if (g.ngx() != h.ngx() || g.ngz() != h.ngz())
        throw std::invalid_argument("jacobian: grid mismatch between g and h");
    const int ngx = g.ngx(), ngz = g.ngz();
    std::vector<double> jv(size_t(ngx) * ngz);
    detail::arakawa_grid(g.grid_values(), g.basis_x(), g.basis_z(), h.grid_values(),
                         h.basis_x(), h.basis_z(), ngx, ngz, jv);
    SpectralField out(g.nx(), g.nz(), g.basis_x(), g.basis_z());
    out.from_grid(jv);
    out.enforce_zero_mean();
    return out;
}

SpectralField deriv_x(const SpectralField& f) {
    const int nx = f.nx(), nz = f.nz();
    if (f.basis_x() == Basis1D::Cosine) {
        // d/dx sqrt(2)cos(m pi x) = -m pi * sqrt(2)sin(m pi x); m = 0 drops.
        SpectralField out(nx, nz, Basis1D::Sine, f.basis_z());
        for (int m = 1; m < nx; ++m)
            for (int j = 0; j < nz; ++j) out.coef(m - 1, j) = -m * kPi * f.coef(m, j);
        return out;
    }
    // d/dx sqrt(2)sin(m pi x) = m pi * sqrt(2)cos(m pi x); the m = nx source
    // exceeds the cosine band and is dropped.
    SpectralField out(nx, nz, Basis1D::Cosine, f.basis_z());
    for (int m = 1; m < nx; ++m)
        for (int j = 0; j < nz; ++j) out.coef(m, j) = m * kPi * f.coef(m - 1, j);
    return out;
}

SpectralField deriv_z(const SpectralField& f) {
    const int nx = f.nx(), nz = f.nz();
    if (f.basis_z() == Basis1D::Cosine) {
        SpectralField out(nx, nz, f.basis_x(), Basis1D::Sine);
        for (int i = 0; i < nx; ++i)
            for (int k = 1; k < nz; ++k) out.coef(i, k - 1) = -k * kPi * f.coef(i, k);
        return out;
    }
    SpectralField out(nx, nz, f.basis_x(), Basis1D::Cosine);
    for (int i = 0; i < nx; ++i)
        for (int k = 1; k < nz; ++k) out.coef(i, k) = k * kPi * f.coef(i, k - 1);
    return out;
}

namespace {

// Coupling matrix of the z-parity change, row kp = 1..nz, column k = 0..nz-1:
// <sqrt2 sin(k'pi z), 1> = sqrt2 (1-(-1)^k')/(k' pi)
// <sqrt2 sin(k'pi z), sqrt2 cos(k pi z)> = 4k'/(pi (k'^2-k^2)) for odd k+k'.
const std::vector<double>& cos_to_sine_matrix(int nz) {
    static std::mutex mu;
    static std::map<int, std::vector<double>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(nz);
    if (it != cache.end()) return it->second;
    std::vector<double> m(size_t(nz) * nz, 0.0);
    for (int kp = 1; kp <= nz; ++kp)
        for (int k = 0; k < nz; ++k) {
            if ((k + kp) % 2 == 0) continue;
            m[size_t(kp - 1) * nz + k] =
                (k == 0) ? 2.0 * std::sqrt(2.0) / (kPi * kp)
                         : 4.0 * kp / (kPi * (double(kp) * kp - double(k) * k));
        }
    return cache.emplace(nz, std::move(m)).first->second;
}

} // namespace

SpectralField project_z_cosine_to_sine(const SpectralField& f) {
    if (f.basis_z() != Basis1D::Cosine)
        throw std::invalid_argument("project_z_cosine_to_sine: z-basis must be cosine");
    const int nx = f.nx(), nz = f.nz();
    SpectralField out(nx, nz, f.basis_x(), Basis1D::Sine);
    const std::vector<double>& p = cos_to_sine_matrix(nz);
    for (int i = 0; i < nx; ++i) {
        const double* fin = f.coeffs().data() + size_t(i) * nz;
        double* fout = out.coeffs().data() + size_t(i) * nz;
        for (int kp = 0; kp < nz; ++kp) {
            const double* row = p.data() + size_t(kp) * nz;
            double s = 0.0;
            for (int k = 0; k < nz; ++k) s += row[k] * fin[k];
            fout[kp] = s;
        }
    }
    return out;
}

Tendency apply_F1(const StateU& u) {
    SpectralField psi = solve_streamfunction(u.q);
    SpectralField jq = jacobian(u.q, psi);
    SpectralField js = jacobian(u.S, psi);
    jq *= -1.0;
    js *= -1.0;
    js.enforce_zero_mean();
    return Tendency{std::move(jq), std::move(js)};
}

Tendency apply_F2(const StateU& u, const PhysicalParams& params) {
    SpectralField dq = project_z_cosine_to_sine(deriv_x(u.S));
    dq *= -params.Ra;
    SpectralField ds = SpectralField::neumann(u.nx(), u.nz());
    return Tendency{std::move(dq), std::move(ds)};
}

double inner_product(const SpectralField& a, const SpectralField& b) {
    if (!a.same_layout(b)) throw std::invalid_argument("inner_product: layout mismatch");
    double s = 0.0;
    auto ca = a.coeffs(), cb = b.coeffs();
    for (size_t i = 0; i < ca.size(); ++i) s += ca[i] * cb[i];
    return s;
}

double max_velocity_bound(const SpectralField& psi) {
    double bx = 0.0, bz = 0.0;  // bounds on |psi_x|, |psi_z|
    for (int i = 0; i < psi.nx(); ++i) {
        for (int j = 0; j < psi.nz(); ++j) {
            const double c = 2.0 * kPi * std::abs(psi.coef(i, j));
            bx += psi.mode_m(i) * c;
            bz += psi.mode_k(j) * c;
        }
    }
    return std::max(bx, bz);
}

double max_velocity_exact(const SpectralField& psi) {
    double m = 0.0;
    for (const SpectralField& d : {deriv_x(psi), deriv_z(psi)}) {
        for (double v : d.grid_values()) m = std::max(m, std::abs(v));
    }
    return m;
}

} // namespace gcur
