#pragma once

namespace aqua {

inline constexpr const char* kVersion = "0.1.0";

/// Schema version stamped into every manifest, sidecar, library and report file.
inline constexpr int kSchemaVersion = 1;

} // namespace aqua
