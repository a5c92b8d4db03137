#pragma once

namespace gsp2p {
inline constexpr const char* kVersion = "0.1.0";
}
