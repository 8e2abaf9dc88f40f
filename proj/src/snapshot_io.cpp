#include "gcur/snapshot_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace gcur {

namespace {

constexpr uint32_t kSnapshotVersion = 1;

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double d) {
    uint64_t v;
    std::memcpy(&v, &d, 8);
    for (int i = 0; i < 8; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}

struct Reader {
    std::string data;
    size_t pos = 0;

    void need(size_t n, const char* what) {
        if (pos + n > data.size())
            throw std::runtime_error(std::string("snapshot truncated reading ") + what);
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(data[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    double f64(const char* what) {
        need(8, what);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(data[pos + i])) << (8 * i);
        pos += 8;
        double d;
        std::memcpy(&d, &v, 8);
        return d;
    }
};

uint32_t basis_tag(const SpectralField& f) {
    return (f.basis_x() == Basis1D::Sine && f.basis_z() == Basis1D::Sine) ? 0u : 1u;
}

} // namespace

void write_snapshot(const StateU& state, const std::string& path) {
    std::string buf;
    buf.reserve(24 + 16 * size_t(state.nx()) * state.nz());
    buf.append("GCUR", 4);
    put_u32(buf, kSnapshotVersion);
    put_u32(buf, uint32_t(state.nx()));
    put_u32(buf, uint32_t(state.nz()));
    put_u32(buf, basis_tag(state.q));
    put_u32(buf, basis_tag(state.S));
    for (double v : state.q.coeffs()) put_f64(buf, v);
    for (double v : state.S.coeffs()) put_f64(buf, v);

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("snapshot: cannot open " + path + " for writing");
    os.write(buf.data(), std::streamsize(buf.size()));
    if (!os) throw std::runtime_error("snapshot: write failed for " + path);
}

StateU read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("snapshot: cannot open " + path);
    Reader r;
    r.data.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());

    r.need(4, "magic");
    if (r.data.compare(0, 4, "GCUR") != 0)
        throw std::runtime_error("snapshot: magic mismatch (not a GCUR file)");
    r.pos = 4;
    const uint32_t version = r.u32("version");
    if (version != kSnapshotVersion)
        throw std::runtime_error("snapshot: unsupported format version " +
                                 std::to_string(version));
    const uint32_t nx = r.u32("nx"), nz = r.u32("nz");
    if (nx < 1 || nz < 1 || nx > (1u << 16) || nz > (1u << 16))
        throw std::runtime_error("snapshot: implausible mode counts");
    const uint32_t tq = r.u32("q basis tag"), ts = r.u32("S basis tag");
    if (tq != 0 || ts != 1)
        throw std::runtime_error("snapshot: unexpected basis tags");

    StateU u{int(nx), int(nz)};
    for (double& v : u.q.coeffs()) v = r.f64("q coefficients");
    for (double& v : u.S.coeffs()) v = r.f64("S coefficients");
    if (r.pos != r.data.size()) throw std::runtime_error("snapshot: trailing bytes");
    return u;
}

StateU read_snapshot(const std::string& path, int nx, int nz) {
    StateU stored = read_snapshot(path);
    if (stored.nx() == nx && stored.nz() == nz) return stored;
    if (stored.nx() > nx || stored.nz() > nz)
        throw std::runtime_error("snapshot: stored resolution exceeds the requested context");
    StateU out(nx, nz);
    for (int i = 0; i < stored.nx(); ++i)
        for (int j = 0; j < stored.nz(); ++j) {
            out.q.coef(i, j) = stored.q.coef(i, j);
            out.S.coef(i, j) = stored.S.coef(i, j);
        }
    return out;
}

} // namespace gcur
