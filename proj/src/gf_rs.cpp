#include "sienna/gf_rs.hpp"

#include "sienna/errors.hpp"

#include <algorithm>
#include <string>

namespace sienna {

namespace {

int degree(std::uint32_t poly)
{
    int d = -1;
    for (int i = 0; i < 32; ++i)
        if ((poly >> i) & 1) d = i;
    return d;
}

void check_field(const FieldSpec& f)
{
    require(f.k_bits >= 2 && f.k_bits <= 16, "field: k_bits must be in [2, 16], got " + std::to_string(f.k_bits));
    require(degree(f.reduction_poly) == static_cast<int>(f.k_bits),
            "field: reduction polynomial degree must equal k_bits");
}

} // namespace

FieldSpec default_field(unsigned k_bits)
{
    static constexpr std::uint32_t polys[] = {
        0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D,
        0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443, 0x8003, 0x1100B,
    };
    require(k_bits >= 2 && k_bits <= 16, "default_field: k_bits must be in [2, 16]");
    return FieldSpec{k_bits, polys[k_bits]};
}

Symbol gf_mul(Symbol a, Symbol b, const FieldSpec& field)
{
    check_field(field);
    const std::uint32_t q = field.order();
    require(a < q && b < q, "gf_mul: operand outside GF(2^" + std::to_string(field.k_bits) + ")");
    std::uint32_t acc = 0;
    std::uint32_t x = a;
    for (std::uint32_t y = b; y; y >>= 1, x <<= 1)
        if (y & 1) acc ^= x;
    for (int bit = 2 * static_cast<int>(field.k_bits) - 2; bit >= static_cast<int>(field.k_bits); --bit)
        if ((acc >> bit) & 1) acc ^= field.reduction_poly << (bit - field.k_bits);
    return static_cast<Symbol>(acc);
}

GaloisField::GaloisField(const FieldSpec& spec) : spec_(spec), q_(spec.order())
{
    check_field(spec);
    const std::uint32_t n = q_ - 1;
    // exp_ holds two periods, then a zero region that log_[0] points into, so
    // mul needs no branch on zero operands.
    exp_.assign(4 * n + 1, 0);
    log_.assign(q_, 0);
    std::uint32_t x = 1;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (i > 0 && x == 1)
            throw SpecError("field: reduction polynomial is not primitive");
        exp_[i] = static_cast<Symbol>(x);
        log_[x] = i;
        x <<= 1;
        if (x & q_) x ^= spec.reduction_poly;
    }
    require(x == 1, "field: reduction polynomial is not primitive");
    for (std::uint32_t i = n; i < 2 * n; ++i) exp_[i] = exp_[i - n];
    log_[0] = 2 * n;

    inv_.assign(q_, 0);
    for (std::uint32_t a = 1; a < q_; ++a) inv_[a] = exp_[(n - log_[a]) % n];
}

Symbol GaloisField::inv(Symbol a) const
{
    require(a != 0 && a < q_, "field: zero has no inverse");
    return inv_[a];
}

Symbol GaloisField::alpha_pow(long e) const
{
    const long n = static_cast<long>(q_ - 1);
    long r = e % n;
    if (r < 0) r += n;
    return exp_[static_cast<std::size_t>(r)];
}

void RsCodeSpec::validate() const
{
    check_field(field);
    require(n_symbols >= 1 && n_symbols < m_symbols, "rs: need 1 <= N < M");
    require(m_symbols <= field.order() - 1, "rs: M must not exceed 2^K - 1");
    require((m_symbols - n_symbols) / 2 >= 1, "rs: correction capacity floor((M-N)/2) must be >= 1");
}

RsCodeSpec make_rs_spec(unsigned k_bits, unsigned m_symbols, unsigned n_symbols)
{
    RsCodeSpec s{default_field(k_bits), m_symbols, n_symbols};
    s.validate();
    return s;
}

unsigned correctable_symbols(const RsCodeSpec& spec)
{
    spec.validate();
    return (spec.m_symbols - spec.n_symbols) / 2;
}

ReedSolomon::ReedSolomon(const RsCodeSpec& spec) : spec_(spec), gf_((spec.validate(), spec.field))
{
    // g(x) = prod_{j < R} (x - alpha^j)
    const unsigned r = spec_.parity_symbols();
    generator_ = {1};
    for (unsigned j = 0; j < r; ++j) {
        const Symbol root = gf_.alpha_pow(j);
        std::vector<Symbol> next(generator_.size() + 1, 0);
        for (std::size_t i = 0; i < generator_.size(); ++i) {
            next[i] ^= generator_[i];
            next[i + 1] ^= gf_.mul(generator_[i], root);
        }
        generator_ = std::move(next);
    }
}

void ReedSolomon::check_symbols(std::span<const Symbol> block, std::size_t expected, const char* what) const
{
    require(block.size() == expected, std::string(what) + ": expected " + std::to_string(expected) +
                                          " symbols, got " + std::to_string(block.size()));
    for (Symbol s : block) require(s < gf_.size(), std::string(what) + ": symbol outside field");
}

std::vector<Symbol> ReedSolomon::encode(std::span<const Symbol> message) const
{
    check_symbols(message, spec_.n_symbols, "rs_encode");
    const unsigned r = spec_.parity_symbols();
    // LFSR division of m(x) x^R by the monic generator.
    std::vector<Symbol> parity(r, 0);
    for (Symbol m : message) {
        const Symbol feedback = m ^ parity[0];
        for (unsigned i = 0; i + 1 < r; ++i) parity[i] = parity[i + 1] ^ gf_.mul(feedback, generator_[i + 1]);
        parity[r - 1] = gf_.mul(feedback, generator_[r]);
    }
    std::vector<Symbol> cw(message.begin(), message.end());
    cw.insert(cw.end(), parity.begin(), parity.end());
    return cw;
}

void ReedSolomon::syndromes(std::span<const Symbol> word, std::span<Symbol> out) const
{
    // S_j = sum_p c_p alpha^(j * pos_p), accumulated position by position so the
    // inner loop has no carried multiply chain.
    const std::uint32_t order = gf_.size() - 1;
    std::fill(out.begin(), out.end(), Symbol{0});
    for (std::size_t p = 0; p < word.size(); ++p) {
        const auto pos = static_cast<std::uint32_t>((word.size() - 1 - p) % order);
        const std::uint32_t lc = gf_.log_of(word[p]);
        std::uint32_t e = 0;
        for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] ^= gf_.exp_of(lc + e);
            e += pos;
            e -= (e >= order) ? order : 0;
        }
    }
}

std::optional<std::vector<Symbol>> ReedSolomon::decode(std::span<const Symbol> received, DecodeMode mode) const
{
    auto cw = correct(received, mode);
    if (!cw) return std::nullopt;
    cw->resize(spec_.n_symbols);
    return cw;
}

std::optional<std::vector<Symbol>> ReedSolomon::correct(std::span<const Symbol> received, DecodeMode mode) const
{
    check_symbols(received, spec_.m_symbols, "rs_decode");
    const unsigned r = spec_.parity_symbols();
    const unsigned t = r / 2;
    const std::size_t m = spec_.m_symbols;

    std::vector<Symbol> synd(r);
    syndromes(received, synd);
    if (mode == DecodeMode::fast && std::all_of(synd.begin(), synd.end(), [](Symbol v) { return v == 0; }))
        return std::vector<Symbol>(received.begin(), received.end());

    // Berlekamp-Massey, always r iterations with the same work in each:
    // the correction term x^m B(x) is kept pre-shifted and every update runs
    // over the full polynomial, with selects instead of branches.
    // Fast mode only touches coefficients that can be nonzero (degree <= n + 1).
    const bool fast = mode == DecodeMode::fast;
    std::vector<Symbol> lambda(r + 1, 0), shifted(r + 1, 0), saved(r + 1, 0);
    lambda[0] = 1;
    shifted[1] = 1;
    unsigned len = 0;
    Symbol last_disc = 1;
    for (unsigned n = 0; n < r; ++n) {
        Symbol d = synd[n];
        for (unsigned i = 1; i <= n; ++i) d ^= gf_.mul(lambda[i], synd[n - i]);
        const Symbol coef = gf_.mul(d, gf_.inv(last_disc));
        const bool grow = (d != 0) && (2 * len <= n);
        const Symbol keep = grow ? 0 : 1;
        const unsigned hi = fast ? std::min(r, n + 2) : r;
        for (unsigned i = 0; i <= hi; ++i) {
            saved[i] = lambda[i];
            lambda[i] ^= gf_.mul(coef, shifted[i]);
        }
        // shifted <- x * (grow ? saved : shifted)
        for (unsigned i = hi; i >= 1; --i)
            shifted[i] = static_cast<Symbol>(keep ? shifted[i - 1] : saved[i - 1]);
        shifted[0] = 0;
        len = grow ? n + 1 - len : len;
        last_disc = grow ? d : last_disc;
    }

    // More than t errors: nothing left to do. Still fixed work for any <= t.
    if (len > t) return std::nullopt;

    // Omega(x) = S(x) Lambda(x) mod x^r, S(x) = sum S_j x^j. With len <= t a
    // valid correction has deg Omega < len, so only t terms are kept; anything
    // else fails the final syndrome check.
    std::vector<Symbol> omega(t, 0);
    for (unsigned i = 0; i <= t; ++i)
        for (unsigned j = 0; j + i < t; ++j) omega[i + j] ^= gf_.mul(lambda[i], synd[j]);

    // Chien search and Forney over every position; position index p holds x^(m-1-p).
    std::vector<Symbol> corrected(received.begin(), received.end());
    unsigned roots = 0;
    const unsigned deg = fast ? len : t;
    for (std::size_t p = 0; p < m; ++p) {
        const long power = static_cast<long>(m - 1 - p);
        const Symbol x_inv = gf_.alpha_pow(-power);
        Symbol lam = 0, lam_deriv = 0, om = 0;
        for (long i = static_cast<long>(deg); i >= 0; --i) {
            lam = gf_.mul(lam, x_inv) ^ lambda[static_cast<std::size_t>(i)];
            // formal derivative keeps odd-degree terms, shifted down by one
            if (i >= 1) lam_deriv = gf_.mul(lam_deriv, x_inv) ^ ((i & 1) ? lambda[static_cast<std::size_t>(i)] : 0);
            if (i < static_cast<long>(t)) om = gf_.mul(om, x_inv) ^ omega[static_cast<std::size_t>(i)];
        }
        const bool is_root = (lam == 0);
        const Symbol denom = lam_deriv ? lam_deriv : 1;
        const Symbol magnitude = gf_.mul(gf_.alpha_pow(power), gf_.mul(om, gf_.inv(denom)));
        corrected[p] ^= is_root ? magnitude : 0;
        roots += is_root;
    }

    std::vector<Symbol> check(r);
    syndromes(corrected, check);
    const bool clean = std::all_of(check.begin(), check.end(), [](Symbol s) { return s == 0; });
    if (len > t || roots != len || !clean) return std::nullopt;
    return corrected;
}

} // namespace sienna
