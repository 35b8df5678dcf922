#include "pals/rng.hpp"

namespace pals {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag) {
  return mix64(mix64(parent) ^ hash_string(tag));
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t value) {
  return mix64(mix64(parent) ^ mix64(value + 0x632be59bd9b4e019ULL));
}

}  // namespace pals
