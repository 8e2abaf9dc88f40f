#pragma once

#include "gcur/spectral_field.hpp"

#include <string>

namespace gcur {

/// Binary state snapshot, little-endian:
///   magic "GCUR", u32 version, u32 nx, u32 nz, u32 basis tag per field
///   (0 = sine-sine, 1 = cosine-cosine), then the two coefficient arrays as
///   f64, x-mode-major (q first, then S).
void write_snapshot(const StateU& state, const std::string& path);

/// Bit-exact inverse of write_snapshot. Errors on magic mismatch, version
/// mismatch, or truncation.
StateU read_snapshot(const std::string& path);

/// Read into a possibly larger resolution: coefficients are zero-pad embedded,
/// which preserves norms exactly. Shrinking is refused.
StateU read_snapshot(const std::string& path, int nx, int nz);

} // namespace gcur
