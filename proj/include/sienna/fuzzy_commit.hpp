#pragma once

#include "sienna/bits.hpp"
#include "sienna/gf_rs.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace sienna {

using Digest = std::array<std::uint8_t, 32>;

// SHA-256 of the byte-packed bit string (big-endian bits, zero-padded last byte).
Digest hash256(const BitString& data);
Digest hash256_bytes(std::span<const std::uint8_t> data);

// Random value bound by a commitment; N*K bits.
struct Salt {
    BitString bits;
    friend bool operator==(const Salt&, const Salt&) = default;
};

// Opening feature; M*K bits after segmentation and folding.
struct Fingerprint {
    BitString bits;
    friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

struct Commitment {
    BitString masked_codeword; // RS(salt) xor fingerprint
    Digest salt_hash{};        // hash256(0x01 || salt bytes)
    friend bool operator==(const Commitment&, const Commitment&) = default;
};

enum class OpenStatus { recovered, hash_mismatch, decode_failure };

struct OpenOutcome {
    OpenStatus status = OpenStatus::decode_failure;
    Salt salt;                      // set only when recovered
    std::size_t corrected_bits = 0; // bits flipped by the decoder (valid unless decode_failure)

    bool recovered() const { return status == OpenStatus::recovered; }
};

Digest salt_digest(const Salt& salt);

class HashDrbg;
Salt random_salt(const RsCodeSpec& spec, HashDrbg& drbg);

Commitment commit(const Salt& salt, const Fingerprint& fingerprint, const ReedSolomon& code);
OpenOutcome open(const Commitment& commitment, const Fingerprint& fingerprint, const ReedSolomon& code);

// Bitwise XOR of equal-length segments. Throws on empty or ragged input.
BitString xor_fold(std::span<const BitString> segments);

// Wire form: "SNCM" | version | K, M, N as big-endian u16 | codeword bytes | digest.
inline constexpr std::uint8_t commitment_wire_version = 1;
std::vector<std::uint8_t> serialize_commitment(const Commitment& c, const RsCodeSpec& spec);
Commitment deserialize_commitment(std::span<const std::uint8_t> bytes, const RsCodeSpec& expected);

} // namespace sienna
