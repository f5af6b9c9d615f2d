#include "sienna/rng.hpp"

#include <openssl/sha.h>

#include <cstring>

namespace sienna {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

HashDrbg::HashDrbg(std::uint64_t seed, std::string_view label)
{
    SHA256(reinterpret_cast<const unsigned char*>(label.data()), label.size(), key_.data());
    for (int i = 0; i < 8; ++i) key_[32 + i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
}

void HashDrbg::refill()
{
    std::array<std::uint8_t, 48> input{};
    std::memcpy(input.data(), key_.data(), key_.size());
    for (int i = 0; i < 8; ++i) input[40 + i] = static_cast<std::uint8_t>(counter_ >> (56 - 8 * i));
    ++counter_;
    SHA256(input.data(), input.size(), block_.data());
    used_ = 0;
}

std::uint8_t HashDrbg::next_byte()
{
    if (used_ == block_.size()) refill();
    return block_[used_++];
}

std::uint64_t HashDrbg::next_u64()
{
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | next_byte();
    return v;
}

BitString HashDrbg::bits(std::size_t n)
{
    BitString out(n);
    std::uint8_t byte = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 8 == 0) byte = next_byte();
        out.set(i, (byte >> (7 - i % 8)) & 1);
    }
    return out;
}

} // namespace sienna
