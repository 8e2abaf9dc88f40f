#pragma once

#include "gcur/integrator.hpp"

#include <string>

namespace gcur {

inline constexpr const char* kCodeVersion = "0.1.0";

/// Parse a JSON config document into a validated SimConfig with defaults
/// applied. Unknown keys are rejected; invalid values raise errors naming the
/// offending key. Minimal document: {"Ra": 1.0}.
SimConfig parse_config(const std::string& text);

/// Canonical JSON form (explicit covariance arrays); parse(serialize(c))
/// reproduces c exactly.
std::string serialize_config(const SimConfig& cfg);

} // namespace gcur
