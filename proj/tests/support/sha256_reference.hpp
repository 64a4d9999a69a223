#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace testsupport {

// Straightforward FIPS 180-4 SHA-256, used to cross-check the library's
// OpenSSL-backed routing keys.
std::array<std::uint8_t, 32> sha256(const std::vector<std::uint8_t>& message);

}  // namespace testsupport
