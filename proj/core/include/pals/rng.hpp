#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pals {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a over the bytes of `s`.
std::uint64_t hash_string(std::string_view s);

/// Child seed for a named stream. Streams with different tags are
/// statistically independent; the construction is stable across platforms.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t value);

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace pals
