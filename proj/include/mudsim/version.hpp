#pragma once

namespace mudsim {

inline constexpr const char* version_tag = "mudsim 0.1.0";

} // namespace mudsim
