#pragma once

#include "sienna/bits.hpp"

#include <array>
#include <cstdint>
#include <string_view>

namespace sienna {

// splitmix64 finalizer; derives independent per-trial / per-stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Deterministic CSPRNG: SHA-256 in counter mode over (label, seed).
// Used for salts and jam masks so that runs are reproducible per seed.
class HashDrbg {
public:
    HashDrbg(std::uint64_t seed, std::string_view label);

    std::uint8_t next_byte();
    std::uint64_t next_u64();
    BitString bits(std::size_t n);

private:
    void refill();

    std::array<std::uint8_t, 40> key_{}; // 32-byte label digest + 8-byte seed
    std::uint64_t counter_ = 0;
    std::array<std::uint8_t, 32> block_{};
    std::size_t used_ = 32;
};

} // namespace sienna
