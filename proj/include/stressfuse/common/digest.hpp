#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace stressfuse {

// 64-bit FNV-1a, rendered as 16 lowercase hex digits. Used as a content
// digest for configs and outputs, not for security.
std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_hex(std::string_view bytes);

}  // namespace stressfuse
