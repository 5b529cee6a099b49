#pragma once

#include <cstdint>
#include <string>

namespace mpaths {

/// Round-trip decimal form ("%.17g"); non-finite values print as nan / inf / -inf.
std::string format_double(double v);

/// 64-bit FNV-1a, used to fingerprint configurations in output headers.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace mpaths
