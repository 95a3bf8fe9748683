#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace pmd::detail {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace pmd::detail
