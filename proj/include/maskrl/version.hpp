#pragma once

namespace maskrl {

inline constexpr const char* kVersion = "0.1.0";

}
