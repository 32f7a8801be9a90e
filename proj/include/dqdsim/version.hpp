#pragma once

namespace dqdsim {

inline constexpr const char* version = "0.1.0";

}  // namespace dqdsim
