#include "sienna/bits.hpp"

#include "sienna/errors.hpp"

#include <algorithm>
#include <numeric>

namespace sienna {

BitString::BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits))
{
    for (auto& b : bits_) b = b ? 1 : 0;
}

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes, std::size_t n_bits)
{
    require(n_bits <= bytes.size() * 8, "from_bytes: not enough bytes for requested bit count");
    BitString out(n_bits);
    for (std::size_t i = 0; i < n_bits; ++i)
        out.bits_[i] = (bytes[i / 8] >> (7 - i % 8)) & 1;
    return out;
}

BitString BitString::from_string(const std::string& s)
{
    BitString out;
    out.bits_.reserve(s.size());
    for (char c : s) {
        require(c == '0' || c == '1', "from_string: expected only '0' and '1'");
        out.bits_.push_back(c == '1');
    }
    return out;
}

std::vector<std::uint8_t> BitString::to_bytes() const
{
    std::vector<std::uint8_t> out((bits_.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits_.size(); ++i)
        out[i / 8] |= static_cast<std::uint8_t>(bits_[i] << (7 - i % 8));
    return out;
}

std::string BitString::to_string() const
{
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) s[i] = '1';
    return s;
}

void BitString::append(const BitString& other)
{
    bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

BitString BitString::slice(std::size_t pos, std::size_t len) const
{
    require(pos + len <= bits_.size(), "slice: range out of bounds");
    return BitString(std::vector<std::uint8_t>(bits_.begin() + pos, bits_.begin() + pos + len));
}

std::size_t BitString::popcount() const
{
    return std::accumulate(bits_.begin(), bits_.end(), std::size_t{0});
}

BitString& BitString::operator^=(const BitString& other)
{
    require(size() == other.size(), "xor: bit strings differ in length");
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] ^= other.bits_[i];
    return *this;
}

std::size_t hamming_distance(const BitString& a, const BitString& b)
{
    require(a.size() == b.size(), "hamming_distance: length mismatch");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]);
    return d;
}

BitString symbols_to_bits(std::span<const std::uint16_t> symbols, unsigned k_bits)
{
    BitString out(symbols.size() * k_bits);
    for (std::size_t s = 0; s < symbols.size(); ++s)
        for (unsigned j = 0; j < k_bits; ++j)
            out.set(s * k_bits + j, (symbols[s] >> (k_bits - 1 - j)) & 1);
    return out;
}

std::vector<std::uint16_t> bits_to_symbols(const BitString& bits, unsigned k_bits)
{
    require(k_bits > 0 && bits.size() % k_bits == 0, "bits_to_symbols: length not a multiple of symbol width");
    std::vector<std::uint16_t> out(bits.size() / k_bits, 0);
    for (std::size_t s = 0; s < out.size(); ++s) {
        std::uint16_t v = 0;
        for (unsigned j = 0; j < k_bits; ++j) v = static_cast<std::uint16_t>((v << 1) | bits[s * k_bits + j]);
        out[s] = v;
    }
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xF]);
    }
    return s;
}

} // namespace sienna
