#pragma once

#include "sienna/bits.hpp"

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sienna {

using Complex = std::complex<double>;

// Square Gray-mapped constellation with unit average symbol energy.
// BPSK is deliberately not offered.
struct QamSpec {
    unsigned order = 4; // 4, 16 or 64

    void validate() const;
    unsigned bits_per_symbol() const;
};

// Point for every bit pattern; index = pattern read MSB first, the first half
// of the bits select the in-phase level and the second half the quadrature level.
std::vector<Complex> qam_constellation(const QamSpec& spec);

// Zero-pads the tail to a whole number of symbols.
std::vector<Complex> qam_modulate(const BitString& bits, const QamSpec& spec);
BitString qam_demodulate(std::span<const Complex> symbols, const QamSpec& spec);

// Received powers. Signal-to-noise ratios are per-bit energy ratios (Eb/N0 =
// p_signal / p0). Jamming is a circular Gaussian whose per-symbol power
// relative to the signal is p_jam / p2.
struct ChannelParams {
    double p0 = 1.0;     // noise floor
    double p1 = 31.62;   // signal at the legitimate receiver (15 dB)
    double p2 = 31.62;   // signal at the eavesdropper
    double p_jam = 0.0;  // jamming power at the eavesdropper
    double p_max = 1000; // hardware ceiling for the jamming ladder
    std::uint64_t seed = 1;

    void validate() const;
    bool effective_jamming() const { return p2 > 0 && p_jam / p2 > 1.0 && p_jam / p2 < 9.0; }
};

struct LinkBudget {
    double signal_power = 1.0;
    double noise_power = 0.0;
    double jam_power = 0.0;
};

struct DialogFrame {
    std::vector<Complex> symbols;     // 2n received samples, back-to-back copies
    std::vector<std::uint8_t> jam_mask; // per pair: 0 jams the original, 1 the repetition
    double jam_power = 0.0;
};

std::vector<std::uint8_t> random_jam_mask(std::size_t n, std::mt19937_64& rng);

// Duplicates every symbol, jams the masked copy and adds thermal noise to
// both. Samples are scaled so the transmitted constellation has unit energy.
DialogFrame dup_and_jam(std::span<const Complex> symbols, std::span<const std::uint8_t> jam_mask,
                        const LinkBudget& link, unsigned bits_per_symbol, std::mt19937_64& rng);

// Keeps the unjammed copy of each pair.
std::vector<Complex> receiver_stitch(const DialogFrame& frame, std::span<const std::uint8_t> jam_mask);

enum class EavesdropStrategy { random_pick, energy_threshold, average_both };

struct EavesdropResult {
    BitString bits;
    double ber = 0;
};

// Copy selection per strategy, then demodulation; ber is measured against truth
// (truth is compared over its own length).
EavesdropResult eavesdrop(const DialogFrame& frame, EavesdropStrategy strategy, const QamSpec& spec,
                          const BitString& truth, std::mt19937_64& rng);

double bit_error_rate(const BitString& a, const BitString& b);

double q_function(double x);

// (4 / log2 M) Q(sqrt(3 snr log2 M / (M - 1))), clamped to [0, 0.5].
double ber_theoretical(unsigned order, double snr);
// Nearest-neighbour Gray approximation with the (1 - 1/sqrt M) edge factor.
double ber_gray_approx(unsigned order, double snr);

// Measured BER of an AWGN link at the given Eb/N0.
struct BerMeasurement {
    double ber = 0;
    std::size_t bits = 0;
    std::size_t errors = 0;
};
BerMeasurement simulate_ber(unsigned order, double snr, std::size_t n_symbols, std::uint64_t seed);

double secrecy_capacity(double p1, double p0, double p2, double p_jam);

struct JammingLadder {
    std::vector<double> levels; // strictly decreasing by 9
    std::size_t count() const { return levels.size(); }
};

JammingLadder ladder_levels(double p_max, double p0);

struct NormalityReport {
    std::size_t samples = 0;
    double skewness = 0;
    double excess_kurtosis = 0;
    double jarque_bera = 0;
    double p_value = 0; // chi-square with 2 degrees of freedom
};

// IFFT of random QAM subcarrier loads; statistics over the real parts.
NormalityReport ofdm_gaussianity_demo(std::size_t n_subcarriers, const QamSpec& qam, std::size_t trials,
                                      std::uint64_t seed);

} // namespace sienna
