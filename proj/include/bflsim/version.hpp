#pragma once

namespace bflsim {
inline constexpr const char* kVersion = "0.1.0";
}
