#include "unravel/rng.hpp"

#include <array>

namespace unravel {

std::uint64_t mix64(std::uint64_t x)
{
    x += UINT64_C(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)) * UINT64_C(0x94D049BB133111EB);
    return x ^ (x >> 31);
}

std::uint64_t split_seed(std::uint64_t master_seed, std::uint64_t index)
{
    // Two rounds so that neighbouring (seed, index) pairs land far apart.
    return mix64(mix64(master_seed) ^ mix64(index + UINT64_C(0xD1B54A32D192ED03)));
}

Engine make_engine(std::uint64_t seed)
{
    std::array<std::uint32_t, 8> words{};
    std::uint64_t s = seed;
    for (std::size_t i = 0; i < words.size(); i += 2) {
        s = mix64(s);
        words[i] = static_cast<std::uint32_t>(s);
        words[i + 1] = static_cast<std::uint32_t>(s >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return Engine(seq);
}

}  // namespace unravel
