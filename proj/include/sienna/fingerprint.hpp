#pragma once

#include "sienna/bits.hpp"
#include "sienna/breath_sim.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace sienna {

// Two-bit level-crossing code, stored as its bit pattern (first bit = MSB).
enum class LevelCode : std::uint8_t { inside = 0b00, below = 0b01, above = 0b10 };

LevelCode qtz(double x, double q_plus, double q_minus);

struct QuantizerBank {
    std::vector<std::pair<double, double>> levels; // (q_plus, q_minus)
    double sample_interval = 0.1;                  // seconds

    std::size_t count() const { return levels.size(); }
    // q_plus > q_minus per pair; q_plus strictly increasing across branches.
    void validate() const;

    // count symmetric pairs +-(step, 2 step, ...).
    static QuantizerBank symmetric(double step = 0.05, std::size_t count = 10, double sample_interval = 0.1);
};

inline constexpr double default_similarity_threshold = 0.70;

struct FingerprintBits {
    BitString bits;
    std::size_t branches = 0;
    std::size_t samples = 0; // per branch
    double t_str = 0;
    double t_end = 0;

    LevelCode code(std::size_t branch, std::size_t sample) const;
};

// Number of sample instants t_str + j T, j = 0..floor((t_end - t_str) / T).
std::size_t extract_sample_count(double t_str, double t_end, double sample_interval);

// Branch-major concatenation of per-branch codes.
FingerprintBits extract(const DisplacementSeries& series, double t_str, double t_end, const QuantizerBank& bank);

std::vector<BitString> segment_pad(const BitString& bits, std::size_t target_len);

double hamming_similarity(const BitString& a, const BitString& b);

// Zero mean, standard deviation target_std. Puts both sensing modalities on
// the common amplitude unit the bank thresholds are expressed in.
std::vector<double> standardize(std::span<const double> x, double target_std);
DisplacementSeries standardize(const DisplacementSeries& s, double target_std);

// Debug dump: header "branch,sample_index,code", code written as "10"/"01"/"00".
void write_fingerprint_csv(std::ostream& os, const FingerprintBits& fp);

} // namespace sienna
