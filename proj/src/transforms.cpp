#include "gcur/transforms.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace gcur::fft {

namespace {

struct AlignedBuf {
    double* p = nullptr;
    size_t n = 0;
    ~AlignedBuf() {
        if (p) fftw_free(p);
    }
    double* get(size_t need) {
        if (n < need) {
            if (p) fftw_free(p);
            p = static_cast<double*>(fftw_malloc(sizeof(double) * need));
            n = need;
        }
        return p;
    }
};

// Per-thread aligned staging buffers; fftw_malloc alignment lets the planner
// use its SIMD codelets, and new-array execution on equally aligned arrays is
// legal while planning itself is serialized.
AlignedBuf& stage_in() {
    thread_local AlignedBuf b;
    return b;
}
AlignedBuf& stage_out() {
    thread_local AlignedBuf b;
    return b;
}

class PlanCache {
public:
    fftw_plan get(int ngx, int ngz, fftw_r2r_kind kx, fftw_r2r_kind kz) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_tuple(ngx, ngz, int(kx), int(kz));
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        double* in = static_cast<double*>(fftw_malloc(sizeof(double) * size_t(ngx) * ngz));
        double* out = static_cast<double*>(fftw_malloc(sizeof(double) * size_t(ngx) * ngz));
        // FFTW_ESTIMATE keeps planning deterministic across runs.
        fftw_plan p = fftw_plan_r2r_2d(ngx, ngz, in, out, kx, kz, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
        if (!p) throw std::runtime_error("fftw_plan_r2r_2d failed");
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mu_;
    std::map<std::tuple<int, int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

// Mode number of storage index i: Sine axes store m = i+1, Cosine m = i.
inline int mode_of(Basis1D b, int i) { return b == Basis1D::Sine ? i + 1 : i; }

// Normalization of the basis function relative to the raw cos/sin:
// sqrt(2) except the cosine m = 0 mode which is the constant 1.
inline double norm_factor(Basis1D b, int m) {
    return (b == Basis1D::Cosine && m == 0) ? 1.0 : std::sqrt(2.0);
}

void check_sizes(int nx, int nz, Basis1D bx, Basis1D bz, int ngx, int ngz) {
    if (nx < 1 || nz < 1 || ngx < 1 || ngz < 1)
        throw std::invalid_argument("transform: nonpositive sizes");
    int needx = (bx == Basis1D::Sine) ? nx + 1 : nx;
    int needz = (bz == Basis1D::Sine) ? nz + 1 : nz;
    if (ngx < needx || ngz < needz)
        throw std::invalid_argument("transform: grid too small for mode count");
}

} // namespace

void to_grid(std::span<const double> coeffs, int nx, int nz,
             Basis1D bx, Basis1D bz,
             std::span<double> grid, int ngx, int ngz) {
    check_sizes(nx, nz, bx, bz, ngx, ngz);
    if (coeffs.size() != size_t(nx) * nz || grid.size() != size_t(ngx) * ngz)
        throw std::invalid_argument("transform: buffer size mismatch");

    // DCT-III: X_0 + 2*sum X_k cos(...);  DST-III: 2*sum X_k sin(...) (+ an
    // alternating top-mode term, kept zero). Scale so the output is the sum
    // of orthonormal modes.
    const size_t n = size_t(ngx) * ngz;
    double* in = stage_in().get(n);
    double* out = stage_out().get(n);
    std::memset(in, 0, sizeof(double) * n);
    for (int i = 0; i < nx; ++i) {
        const int mi = mode_of(bx, i);
        double fx = norm_factor(bx, mi);
        fx = (bx == Basis1D::Cosine && mi == 0) ? 1.0 : fx * 0.5;
        for (int j = 0; j < nz; ++j) {
            const int mj = mode_of(bz, j);
            double fz = norm_factor(bz, mj);
            fz = (bz == Basis1D::Cosine && mj == 0) ? 1.0 : fz * 0.5;
            in[size_t(i) * ngz + j] = coeffs[size_t(i) * nz + j] * fx * fz;
        }
    }
    fftw_r2r_kind kx = (bx == Basis1D::Sine) ? FFTW_RODFT01 : FFTW_REDFT01;
    fftw_r2r_kind kz = (bz == Basis1D::Sine) ? FFTW_RODFT01 : FFTW_REDFT01;
    fftw_execute_r2r(cache().get(ngx, ngz, kx, kz), in, out);
    std::memcpy(grid.data(), out, sizeof(double) * n);
}

void to_spectral(std::span<const double> grid, int ngx, int ngz,
                 Basis1D bx, Basis1D bz,
                 std::span<double> coeffs, int nx, int nz) {
    check_sizes(nx, nz, bx, bz, ngx, ngz);
    if (coeffs.size() != size_t(nx) * nz || grid.size() != size_t(ngx) * ngz)
        throw std::invalid_argument("transform: buffer size mismatch");

    const size_t n = size_t(ngx) * ngz;
    double* in = stage_in().get(n);
    double* out = stage_out().get(n);
    std::memcpy(in, grid.data(), sizeof(double) * n);
    fftw_r2r_kind kx = (bx == Basis1D::Sine) ? FFTW_RODFT10 : FFTW_REDFT10;
    fftw_r2r_kind kz = (bz == Basis1D::Sine) ? FFTW_RODFT10 : FFTW_REDFT10;
    fftw_execute_r2r(cache().get(ngx, ngz, kx, kz), in, out);

    // DCT-II/DST-II give 2*sum_j X_j basis(x_j) per axis; the orthonormal
    // coefficient is the grid inner product with weight 1/(ngx*ngz) against the
    // normalized mode, so a = Y * norm_x * norm_z / (4 ngx ngz). For both bases
    // the FFTW output index of the mode at storage index i is i.
    const double w = 1.0 / (4.0 * double(ngx) * double(ngz));
    for (int i = 0; i < nx; ++i) {
        const double fx = norm_factor(bx, mode_of(bx, i));
        for (int j = 0; j < nz; ++j) {
            const double fz = norm_factor(bz, mode_of(bz, j));
            coeffs[size_t(i) * nz + j] = out[size_t(i) * ngz + j] * fx * fz * w;
        }
    }
}

} // namespace gcur::fft
