#pragma once

#include <cstdint>
#include <random>

namespace unravel {

/// Engine used for every trajectory.
using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the stream with counter `index` under `master_seed`. A pure
/// function of both arguments, so trajectory k draws the same numbers
/// whichever worker runs it and in whatever order.
std::uint64_t split_seed(std::uint64_t master_seed, std::uint64_t index);

Engine make_engine(std::uint64_t seed);

}  // namespace unravel
