#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sienna {

using Symbol = std::uint16_t;

// GF(2^k) described by its reduction polynomial (bit i = coefficient of x^i).
struct FieldSpec {
    unsigned k_bits = 8;
    std::uint32_t reduction_poly = 0x11D;

    std::uint32_t order() const { return 1u << k_bits; }
    friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

// Conventional primitive polynomial for 2 <= k <= 16 (0x11D for k = 8).
FieldSpec default_field(unsigned k_bits);

// Carry-less multiply then reduce. Throws SpecError if a or b is outside the field.
Symbol gf_mul(Symbol a, Symbol b, const FieldSpec& field);

// Table-driven field arithmetic. The reduction polynomial must be primitive so
// that x generates the multiplicative group.
class GaloisField {
public:
    explicit GaloisField(const FieldSpec& spec);

    const FieldSpec& spec() const { return spec_; }
    std::uint32_t size() const { return q_; }

    Symbol mul(Symbol a, Symbol b) const { return exp_[log_[a] + log_[b]]; }
    Symbol inv(Symbol a) const; // a != 0
    Symbol div(Symbol a, Symbol b) const { return mul(a, inv(b)); }
    Symbol alpha_pow(long e) const;

    // Raw tables for exponent-domain loops. log_of(0) indexes the zero run of
    // the exp table, so exp_of(log_of(0) + e) == 0 for any e <= 2(q-1).
    std::uint32_t log_of(Symbol a) const { return log_[a]; }
    Symbol exp_of(std::uint32_t e) const { return exp_[e]; }

private:
    FieldSpec spec_;
    std::uint32_t q_;
    std::vector<Symbol> exp_;        // 4(q-1)+1 entries, zeros past 2(q-1)
    std::vector<std::uint32_t> log_; // log_[0] = 2(q-1)
    std::vector<Symbol> inv_;
};

// RS(2^K, M, N): codeword length M, message length N, over GF(2^K).
struct RsCodeSpec {
    FieldSpec field{};
    unsigned m_symbols = 255;
    unsigned n_symbols = 201;

    unsigned k_bits() const { return field.k_bits; }
    unsigned parity_symbols() const { return m_symbols - n_symbols; }
    std::size_t codeword_bits() const { return std::size_t{m_symbols} * field.k_bits; }
    std::size_t message_bits() const { return std::size_t{n_symbols} * field.k_bits; }

    // Throws SpecError unless N < M <= 2^K - 1 and t >= 1.
    void validate() const;
    friend bool operator==(const RsCodeSpec&, const RsCodeSpec&) = default;
};

RsCodeSpec make_rs_spec(unsigned k_bits, unsigned m_symbols, unsigned n_symbols);

// floor((M - N) / 2)
unsigned correctable_symbols(const RsCodeSpec& spec);

// Systematic Reed-Solomon code with generator roots alpha^0 .. alpha^(M-N-1).
// Codeword layout is [message (N) | parity (M-N)], first symbol = highest degree.
//
// decode() runs a fixed sequence of work for every input of a given code:
// all syndromes, the full Berlekamp-Massey iteration count, a Chien search and
// Forney evaluation over every position, and a re-check of the corrected word.
// Its cost therefore does not depend on how many errors (0..t) are present;
// inputs with more than t errors stop after Berlekamp-Massey.
// DecodeMode::fast returns as soon as all syndromes vanish. It exists for
// simulated adversaries and bulk experiments, not for a device.
enum class DecodeMode { constant_work, fast };

class ReedSolomon {
public:
    explicit ReedSolomon(const RsCodeSpec& spec);

    const RsCodeSpec& spec() const { return spec_; }
    const GaloisField& field() const { return gf_; }
    const std::vector<Symbol>& generator() const { return generator_; }

    std::vector<Symbol> encode(std::span<const Symbol> message) const;

    // Message of the nearest codeword within t symbols, or nullopt.
    std::optional<std::vector<Symbol>> decode(std::span<const Symbol> received,
                                              DecodeMode mode = DecodeMode::constant_work) const;

    // Same, returning the corrected codeword.
    std::optional<std::vector<Symbol>> correct(std::span<const Symbol> received,
                                               DecodeMode mode = DecodeMode::constant_work) const;

private:
    void check_symbols(std::span<const Symbol> block, std::size_t expected, const char* what) const;
    void syndromes(std::span<const Symbol> word, std::span<Symbol> out) const;

    RsCodeSpec spec_;
    GaloisField gf_;
    std::vector<Symbol> generator_; // highest degree first, monic
};

} // namespace sienna
