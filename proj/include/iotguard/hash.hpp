#pragma once

#include <cstdint>
#include <string>

namespace iotguard {

// FNV-1a over the bytes, 16 lowercase hex chars; stable across platforms.
std::string fnv1a64_hex(const std::string& data);

}  // namespace iotguard
