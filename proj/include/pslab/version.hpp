#pragma once

namespace pslab {

inline constexpr const char* kVersion = "0.1.0";

inline const std::pair<const char*, const char*> kModuleVersions[] = {
    {"spectral_core", "1"}, {"halfspace_extension", "1"}, {"geometry", "1"},
    {"propagator", "1"},    {"norms_estimates", "1"},     {"commutators", "1"},
};

}  // namespace pslab
