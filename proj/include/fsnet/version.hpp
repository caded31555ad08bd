#pragma once

namespace fsnet {

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace fsnet
