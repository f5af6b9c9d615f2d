#include "sienna/fuzzy_commit.hpp"

#include "sienna/errors.hpp"
#include "sienna/rng.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <string>

namespace sienna {

namespace {

constexpr std::uint8_t salt_domain = 0x01;

void check_lengths(const BitString& masked_or_fp, std::size_t expected, const char* what)
{
    require(masked_or_fp.size() == expected, std::string(what) + ": expected " + std::to_string(expected) +
                                                 " bits, got " + std::to_string(masked_or_fp.size()));
}

void put_u16(std::vector<std::uint8_t>& out, unsigned v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

unsigned get_u16(std::span<const std::uint8_t> b, std::size_t at)
{
    return (unsigned{b[at]} << 8) | b[at + 1];
}

} // namespace

Digest hash256_bytes(std::span<const std::uint8_t> data)
{
    Digest d{};
    SHA256(data.data(), data.size(), d.data());
    return d;
}

Digest hash256(const BitString& data)
{
    const auto bytes = data.to_bytes();
    return hash256_bytes(bytes);
}

Digest salt_digest(const Salt& salt)
{
    std::vector<std::uint8_t> buf{salt_domain};
    const auto bytes = salt.bits.to_bytes();
    buf.insert(buf.end(), bytes.begin(), bytes.end());
    return hash256_bytes(buf);
}

Salt random_salt(const RsCodeSpec& spec, HashDrbg& drbg)
{
    return Salt{drbg.bits(spec.message_bits())};
}

Commitment commit(const Salt& salt, const Fingerprint& fingerprint, const ReedSolomon& code)
{
    const auto& spec = code.spec();
    check_lengths(salt.bits, spec.message_bits(), "commit: salt");
    check_lengths(fingerprint.bits, spec.codeword_bits(), "commit: fingerprint");
    const auto message = bits_to_symbols(salt.bits, spec.k_bits());
    const auto codeword = code.encode(message);
    return Commitment{symbols_to_bits(codeword, spec.k_bits()) ^ fingerprint.bits, salt_digest(salt)};
}

OpenOutcome open(const Commitment& commitment, const Fingerprint& fingerprint, const ReedSolomon& code)
{
    const auto& spec = code.spec();
    check_lengths(commitment.masked_codeword, spec.codeword_bits(), "open: commitment");
    check_lengths(fingerprint.bits, spec.codeword_bits(), "open: fingerprint");

    const BitString noisy = commitment.masked_codeword ^ fingerprint.bits;
    const auto received = bits_to_symbols(noisy, spec.k_bits());
    OpenOutcome out;
    const auto corrected = code.correct(received);
    if (!corrected) {
        out.status = OpenStatus::decode_failure;
        return out;
    }
    const BitString corrected_bits = symbols_to_bits(*corrected, spec.k_bits());
    out.corrected_bits = hamming_distance(noisy, corrected_bits);
    Salt candidate{corrected_bits.slice(0, spec.message_bits())};
    if (salt_digest(candidate) != commitment.salt_hash) {
        out.status = OpenStatus::hash_mismatch;
        return out;
    }
    out.status = OpenStatus::recovered;
    out.salt = std::move(candidate);
    return out;
}

BitString xor_fold(std::span<const BitString> segments)
{
    require(!segments.empty(), "xor_fold: no segments");
    BitString acc = segments.front();
    for (std::size_t i = 1; i < segments.size(); ++i) {
        require(segments[i].size() == acc.size(), "xor_fold: segments differ in length");
        acc ^= segments[i];
    }
    return acc;
}

std::vector<std::uint8_t> serialize_commitment(const Commitment& c, const RsCodeSpec& spec)
{
    check_lengths(c.masked_codeword, spec.codeword_bits(), "serialize_commitment");
    std::vector<std::uint8_t> out{'S', 'N', 'C', 'M', commitment_wire_version};
    put_u16(out, spec.k_bits());
    put_u16(out, spec.m_symbols);
    put_u16(out, spec.n_symbols);
    const auto body = c.masked_codeword.to_bytes();
    out.insert(out.end(), body.begin(), body.end());
    out.insert(out.end(), c.salt_hash.begin(), c.salt_hash.end());
    return out;
}

Commitment deserialize_commitment(std::span<const std::uint8_t> bytes, const RsCodeSpec& expected)
{
    constexpr std::size_t header = 4 + 1 + 6;
    require(bytes.size() >= header, "deserialize_commitment: truncated header");
    require(std::equal(bytes.begin(), bytes.begin() + 4, "SNCM"), "deserialize_commitment: bad magic");
    require(bytes[4] == commitment_wire_version, "deserialize_commitment: unsupported version");
    require(get_u16(bytes, 5) == expected.k_bits() && get_u16(bytes, 7) == expected.m_symbols &&
                get_u16(bytes, 9) == expected.n_symbols,
            "deserialize_commitment: code parameters do not match");
    const std::size_t body = (expected.codeword_bits() + 7) / 8;
    require(bytes.size() == header + body + 32, "deserialize_commitment: wrong length");
    Commitment c;
    c.masked_codeword = BitString::from_bytes(bytes.subspan(header, body), expected.codeword_bits());
    std::copy_n(bytes.begin() + static_cast<long>(header + body), 32, c.salt_hash.begin());
    return c;
}

} // namespace sienna
