#pragma once

namespace nonholo {
inline constexpr const char* kVersion = "0.1.0";
}
