#include "sienna/phy_jam.hpp"

#include "sienna/errors.hpp"
#include "sienna/rng.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace sienna {

namespace {

unsigned side_bits(unsigned order)
{
    return order == 4 ? 1 : order == 16 ? 2 : 3;
}

unsigned gray(unsigned v) { return v ^ (v >> 1); }

// Amplitude level index for each Gray code on one axis.
std::vector<int> level_of_gray(unsigned bits)
{
    const unsigned n = 1u << bits;
    std::vector<int> out(n);
    for (unsigned i = 0; i < n; ++i) out[gray(i)] = static_cast<int>(2 * i) - static_cast<int>(n - 1);
    return out;
}

double axis_scale(unsigned order)
{
    // average energy of a square M-QAM with levels +-1, +-3, ... is 2 (M - 1) / 3
    return 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);
}

} // namespace

void QamSpec::validate() const
{
    require(order == 4 || order == 16 || order == 64,
            "qam: unsupported order " + std::to_string(order) + " (4, 16 or 64)");
}

unsigned QamSpec::bits_per_symbol() const
{
    validate();
    return 2 * side_bits(order);
}

std::vector<Complex> qam_constellation(const QamSpec& spec)
{
    const unsigned bps = spec.bits_per_symbol();
    const unsigned sb = bps / 2;
    const auto levels = level_of_gray(sb);
    const double s = axis_scale(spec.order);
    std::vector<Complex> pts(spec.order);
    for (unsigned idx = 0; idx < spec.order; ++idx) {
        const unsigned hi = idx >> sb;
        const unsigned lo = idx & ((1u << sb) - 1);
        pts[idx] = Complex(levels[hi] * s, levels[lo] * s);
    }
    return pts;
}

std::vector<Complex> qam_modulate(const BitString& bits, const QamSpec& spec)
{
    const unsigned bps = spec.bits_per_symbol();
    const auto pts = qam_constellation(spec);
    const std::size_t n = (bits.size() + bps - 1) / bps;
    std::vector<Complex> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        unsigned idx = 0;
        for (unsigned b = 0; b < bps; ++b) {
            const std::size_t pos = k * bps + b;
            idx = (idx << 1) | (pos < bits.size() ? bits[pos] : 0u);
        }
        out[k] = pts[idx];
    }
    return out;
}

BitString qam_demodulate(std::span<const Complex> symbols, const QamSpec& spec)
{
    const unsigned bps = spec.bits_per_symbol();
    const unsigned sb = bps / 2;
    const int n_levels = 1 << sb;
    const double s = axis_scale(spec.order);
    auto axis_code = [&](double v) {
        // nearest of the levels -(n-1) .. (n-1) step 2
        const int i = std::clamp(static_cast<int>(std::floor((v / s + n_levels) / 2.0)), 0, n_levels - 1);
        return gray(static_cast<unsigned>(i));
    };
    BitString out;
    for (const Complex& y : symbols) {
        const unsigned idx = (axis_code(y.real()) << sb) | axis_code(y.imag());
        for (int b = static_cast<int>(bps) - 1; b >= 0; --b) out.push_back((idx >> b) & 1u);
    }
    return out;
}

void ChannelParams::validate() const
{
    require(p0 > 0, "channel: noise floor p0 must be positive");
    require(p1 >= 0 && p2 >= 0 && p_jam >= 0, "channel: powers must be non-negative");
    require(p_max > p0, "channel: p_max must exceed p0");
}

std::vector<std::uint8_t> random_jam_mask(std::size_t n, std::mt19937_64& rng)
{
    std::vector<std::uint8_t> mask(n);
    for (auto& m : mask) m = static_cast<std::uint8_t>(rng() & 1u);
    return mask;
}

DialogFrame dup_and_jam(std::span<const Complex> symbols, std::span<const std::uint8_t> jam_mask,
                        const LinkBudget& link, unsigned bits_per_symbol, std::mt19937_64& rng)
{
    require(jam_mask.size() == symbols.size(), "dup_and_jam: mask length must equal symbol count");
    require(link.signal_power > 0, "dup_and_jam: signal power must be positive");
    require(link.noise_power >= 0 && link.jam_power >= 0, "dup_and_jam: powers must be non-negative");
    require(bits_per_symbol >= 1, "dup_and_jam: bits per symbol must be positive");

    // per-dimension standard deviations
    const double noise_sd = std::sqrt(link.noise_power / (link.signal_power * bits_per_symbol) / 2.0);
    const double jam_sd = std::sqrt(link.jam_power / link.signal_power / 2.0);
    std::normal_distribution<double> g(0.0, 1.0);

    DialogFrame frame;
    frame.jam_mask.assign(jam_mask.begin(), jam_mask.end());
    frame.jam_power = link.jam_power;
    frame.symbols.resize(2 * symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        for (std::size_t copy = 0; copy < 2; ++copy) {
            Complex y = symbols[i];
            if (noise_sd > 0) y += Complex(noise_sd * g(rng), noise_sd * g(rng));
            if (jam_mask[i] == copy && jam_sd > 0) y += Complex(jam_sd * g(rng), jam_sd * g(rng));
            frame.symbols[2 * i + copy] = y;
        }
    }
    return frame;
}

std::vector<Complex> receiver_stitch(const DialogFrame& frame, std::span<const std::uint8_t> jam_mask)
{
    require(frame.symbols.size() == 2 * jam_mask.size(), "receiver_stitch: mask length does not match frame");
    std::vector<Complex> out(jam_mask.size());
    for (std::size_t i = 0; i < jam_mask.size(); ++i) out[i] = frame.symbols[2 * i + (jam_mask[i] ? 0 : 1)];
    return out;
}

EavesdropResult eavesdrop(const DialogFrame& frame, EavesdropStrategy strategy, const QamSpec& spec,
                          const BitString& truth, std::mt19937_64& rng)
{
    require(frame.symbols.size() % 2 == 0, "eavesdrop: frame length must be even");
    const std::size_t n = frame.symbols.size() / 2;
    std::vector<Complex> est(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex a = frame.symbols[2 * i], b = frame.symbols[2 * i + 1];
        switch (strategy) {
        case EavesdropStrategy::random_pick: est[i] = (rng() & 1u) ? b : a; break;
        case EavesdropStrategy::energy_threshold: est[i] = std::norm(a) <= std::norm(b) ? a : b; break;
        case EavesdropStrategy::average_both: est[i] = 0.5 * (a + b); break;
        }
    }
    EavesdropResult r;
    r.bits = qam_demodulate(est, spec);
    require(truth.size() <= r.bits.size(), "eavesdrop: truth longer than the frame payload");
    r.ber = bit_error_rate(r.bits.slice(0, truth.size()), truth);
    return r;
}

double bit_error_rate(const BitString& a, const BitString& b)
{
    require(a.size() == b.size() && !a.empty(), "bit_error_rate: need equal non-empty lengths");
    return static_cast<double>(hamming_distance(a, b)) / static_cast<double>(a.size());
}

double q_function(double x)
{
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double ber_theoretical(unsigned order, double snr)
{
    require(order >= 4, "ber_theoretical: order must be at least 4");
    require(snr >= 0, "ber_theoretical: snr must be non-negative");
    const double k = std::log2(static_cast<double>(order));
    const double v = 4.0 / k * q_function(std::sqrt(3.0 * snr * k / (order - 1.0)));
    return std::clamp(v, 0.0, 0.5);
}

double ber_gray_approx(unsigned order, double snr)
{
    require(order >= 4, "ber_gray_approx: order must be at least 4");
    require(snr >= 0, "ber_gray_approx: snr must be non-negative");
    const double k = std::log2(static_cast<double>(order));
    const double edge = 1.0 - 1.0 / std::sqrt(static_cast<double>(order));
    const double v = 4.0 / k * edge * q_function(std::sqrt(3.0 * snr * k / (order - 1.0)));
    return std::clamp(v, 0.0, 0.5);
}

BerMeasurement simulate_ber(unsigned order, double snr, std::size_t n_symbols, std::uint64_t seed)
{
    const QamSpec spec{order};
    const unsigned bps = spec.bits_per_symbol();
    require(snr > 0, "simulate_ber: snr must be positive");
    std::mt19937_64 rng(mix_seed(seed, 0xBE7));
    const auto pts = qam_constellation(spec);
    const double sd = std::sqrt(1.0 / (snr * bps) / 2.0);
    std::normal_distribution<double> g(0.0, 1.0);

    BerMeasurement m;
    constexpr std::size_t chunk = 1 << 14;
    for (std::size_t done = 0; done < n_symbols; done += chunk) {
        const std::size_t count = std::min(chunk, n_symbols - done);
        BitString tx;
        std::vector<Complex> rx(count);
        for (std::size_t i = 0; i < count; ++i) {
            const auto idx = static_cast<unsigned>(rng() % order);
            for (int b = static_cast<int>(bps) - 1; b >= 0; --b) tx.push_back((idx >> b) & 1u);
            rx[i] = pts[idx] + Complex(sd * g(rng), sd * g(rng));
        }
        m.errors += hamming_distance(qam_demodulate(rx, spec), tx);
        m.bits += tx.size();
    }
    m.ber = m.bits ? static_cast<double>(m.errors) / static_cast<double>(m.bits) : 0.0;
    return m;
}

double secrecy_capacity(double p1, double p0, double p2, double p_jam)
{
    require(p0 > 0 && p_jam > 0, "secrecy_capacity: p0 and p_jam must be positive");
    require(p1 >= 0 && p2 >= 0, "secrecy_capacity: powers must be non-negative");
    return std::max(0.0, std::log2(1.0 + p1 / p0) - std::log2(1.0 + p2 / p_jam));
}

JammingLadder ladder_levels(double p_max, double p0)
{
    require(p0 > 0, "ladder_levels: p0 must be positive");
    require(p_max > p0, "ladder_levels: p_max must exceed p0");
    // tolerance keeps exact powers of nine (9, 81, ...) from rounding up
    const auto l = static_cast<std::size_t>(std::ceil(std::log(p_max / p0) / std::log(9.0) - 1e-12));
    JammingLadder ladder;
    double level = p_max;
    for (std::size_t i = 0; i < std::max<std::size_t>(l, 1); ++i) {
        ladder.levels.push_back(level);
        level /= 9.0;
    }
    return ladder;
}

NormalityReport ofdm_gaussianity_demo(std::size_t n_subcarriers, const QamSpec& qam, std::size_t trials,
                                      std::uint64_t seed)
{
    require(n_subcarriers >= 1 && trials >= 1, "ofdm_gaussianity_demo: need subcarriers and trials");
    const auto pts = qam_constellation(qam);
    std::mt19937_64 rng(mix_seed(seed, 0x0FD));

    const auto n = static_cast<int>(n_subcarriers);
    std::unique_ptr<fftw_complex, decltype(&fftw_free)> in(fftw_alloc_complex(n_subcarriers), fftw_free);
    std::unique_ptr<fftw_complex, decltype(&fftw_free)> out(fftw_alloc_complex(n_subcarriers), fftw_free);
    fftw_plan plan = fftw_plan_dft_1d(n, in.get(), out.get(), FFTW_BACKWARD, FFTW_ESTIMATE);

    std::vector<double> xs;
    xs.reserve(n_subcarriers * trials);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n_subcarriers));
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t k = 0; k < n_subcarriers; ++k) {
            const Complex c = pts[rng() % pts.size()];
            in.get()[k][0] = c.real();
            in.get()[k][1] = c.imag();
        }
        fftw_execute(plan);
        for (std::size_t k = 0; k < n_subcarriers; ++k) xs.push_back(out.get()[k][0] * norm);
    }
    fftw_destroy_plan(plan);

    NormalityReport r;
    r.samples = xs.size();
    const double cnt = static_cast<double>(xs.size());
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= cnt;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double x : xs) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= cnt;
    m3 /= cnt;
    m4 /= cnt;
    r.skewness = m3 / std::pow(m2, 1.5);
    r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    r.jarque_bera = cnt / 6.0 * (r.skewness * r.skewness + r.excess_kurtosis * r.excess_kurtosis / 4.0);
    r.p_value = std::exp(-r.jarque_bera / 2.0);
    return r;
}

} // namespace sienna
