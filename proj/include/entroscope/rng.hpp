#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace entroscope {

using Rng = std::mt19937_64;

// Stable 64-bit FNV-1a; std::hash is not stable across toolchains.
std::uint64_t fnv1a64(std::string_view bytes);

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Child stream seeds. Every RNG stream in the library is derived from a user
// seed plus a task identity, so results never depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

// Uniform on the open interval (0, 1), 53-bit resolution.
double uniform01(Rng& rng);

// Uniform integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace entroscope
