#pragma once

namespace qeraser {

inline constexpr const char* artifact_version = "0.1.0";

}  // namespace qeraser
