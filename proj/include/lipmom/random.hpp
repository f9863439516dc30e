#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lipmom {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent stream seed from a base seed and a path of counters
/// (cell index, replicate index, purpose tag...). Depends only on the values,
/// never on call order, so parallel cells are reproducible under any schedule.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept;

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  return Engine(derive_seed(base, path));
}

/// Stream purpose tags.
namespace stream {
inline constexpr std::uint64_t design = 0x11;
inline constexpr std::uint64_t noise = 0x22;
inline constexpr std::uint64_t outliers = 0x33;
inline constexpr std::uint64_t partition = 0x44;
inline constexpr std::uint64_t monte_carlo = 0x55;
inline constexpr std::uint64_t solver = 0x66;
inline constexpr std::uint64_t holdout = 0x77;
inline constexpr std::uint64_t subset = 0x88;
}  // namespace stream

}  // namespace lipmom
