#include "doctest.h"

#include "sienna/errors.hpp"
#include "sienna/phy_jam.hpp"

#include <cmath>
#include <bit>
#include <set>

using namespace sienna;

namespace {

BitString random_bits(std::size_t n, std::mt19937_64& rng)
{
    BitString b;
    for (std::size_t i = 0; i < n; ++i) b.push_back(rng() & 1u);
    return b;
}

double db(double v) { return std::pow(10.0, v / 10.0); }

} // namespace

TEST_CASE("constellations")
{
    for (unsigned m : {4u, 16u, 64u}) {
        const QamSpec spec{m};
        const auto pts = qam_constellation(spec);
        REQUIRE(pts.size() == m);
        double e = 0;
        for (auto p : pts) e += std::norm(p);
        CHECK(e / m == doctest::Approx(1.0));
        // Gray property: nearest neighbours differ in exactly one bit
        double dmin = 1e9;
        for (unsigned a = 0; a < m; ++a)
            for (unsigned b = a + 1; b < m; ++b) dmin = std::min(dmin, std::abs(pts[a] - pts[b]));
        for (unsigned a = 0; a < m; ++a)
            for (unsigned b = a + 1; b < m; ++b)
                if (std::abs(std::abs(pts[a] - pts[b]) - dmin) < 1e-9) REQUIRE(std::popcount(a ^ b) == 1);
    }
    std::set<std::pair<double, double>> distinct;
    for (unsigned v = 0; v < 4; ++v) {
        BitString b;
        b.push_back(v & 2);
        b.push_back(v & 1);
        const auto s = qam_modulate(b, QamSpec{4});
        REQUIRE(s.size() == 1);
        distinct.insert({s[0].real(), s[0].imag()});
    }
    CHECK(distinct.size() == 4);
    CHECK_THROWS_AS(QamSpec{2}.validate(), SpecError);
    CHECK_THROWS_AS(qam_modulate(BitString(8), QamSpec{8}), SpecError);
}

TEST_CASE("modulation round trip")
{
    std::mt19937_64 rng(1);
    const auto bits = random_bits(2040, rng);
    for (unsigned m : {4u, 16u, 64u}) {
        const QamSpec spec{m};
        const auto sym = qam_modulate(bits, spec);
        const auto back = qam_demodulate(sym, spec);
        CHECK(back.slice(0, bits.size()) == bits);
        // 2040 is not a multiple of 6: zero padding fills the last 64-QAM symbol
        CHECK(back.size() == sym.size() * spec.bits_per_symbol());
        CHECK(back.slice(bits.size(), back.size() - bits.size()).popcount() == 0);
    }
}

TEST_CASE("ber_theoretical")
{
    CHECK(ber_theoretical(4, 1e12) == 0.0);
    CHECK(ber_theoretical(4, 0.0) == 0.5);
    CHECK(ber_theoretical(4, 10.0) == doctest::Approx(7.744216431044096e-06).epsilon(1e-9));
    CHECK(ber_theoretical(16, 10.0) == doctest::Approx(0.0023388674905236327).epsilon(1e-9));
    CHECK(ber_gray_approx(16, 10.0) == doctest::Approx(0.0017541506178927245).epsilon(1e-9));
    for (unsigned m : {4u, 16u, 64u}) {
        double prev = 0.5;
        for (double s = 0; s < 1000; s = s * 1.3 + 0.01) {
            const double v = ber_theoretical(m, s);
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 0.5);
            REQUIRE(v <= prev);
            prev = v;
        }
    }
}

TEST_CASE("Monte Carlo BER follows the Gray nearest-neighbour approximation")
{
    // 4-QAM: exact Q(sqrt(2 snr)); 16-QAM: approximation is tight at 10 dB.
    const auto m4 = simulate_ber(4, db(5), 400000, 1);
    CHECK(m4.ber == doctest::Approx(ber_gray_approx(4, db(5))).epsilon(0.05));
    const auto m16 = simulate_ber(16, db(10), 400000, 2);
    CHECK(m16.ber == doctest::Approx(ber_gray_approx(16, db(10))).epsilon(0.08));
    CHECK(simulate_ber(4, db(5), 1000, 9).bits == 2000);
    // deterministic per seed
    CHECK(simulate_ber(16, db(5), 5000, 3).errors == simulate_ber(16, db(5), 5000, 3).errors);
}

TEST_CASE("secrecy capacity")
{
    CHECK(secrecy_capacity(3, 1, 1, 1) == doctest::Approx(1.0));
    CHECK(secrecy_capacity(5, 1, 10, 2) == 0.0);
    CHECK(secrecy_capacity(1, 1, 100, 1) == 0.0);
    CHECK(secrecy_capacity(100, 1, 1, 1) > 0.0);
    CHECK_THROWS_AS(secrecy_capacity(1, 0, 1, 1), SpecError);
    CHECK_THROWS_AS(secrecy_capacity(1, 1, 1, 0), SpecError);
}

TEST_CASE("jamming ladder")
{
    auto l = ladder_levels(81, 1);
    REQUIRE(l.count() == 2);
    CHECK(l.levels[1] == doctest::Approx(9));
    CHECK(ladder_levels(9, 1).count() == 1);
    CHECK(ladder_levels(100, 1).count() == 3);
    CHECK(ladder_levels(1000, 1).count() == 4);
    CHECK_THROWS_AS(ladder_levels(1, 1), SpecError);
    CHECK_THROWS_AS(ladder_levels(0.5, 1), SpecError);

    for (double ratio : {2.0, 9.0, 50.0, 81.0, 100.0, 1000.0, 1e5}) {
        const double p0 = 0.7;
        const auto lad = ladder_levels(ratio * p0, p0);
        for (std::size_t i = 1; i < lad.count(); ++i) REQUIRE(lad.levels[i - 1] / lad.levels[i] == doctest::Approx(9));
        CHECK(lad.levels.back() >= p0 * (1 - 1e-12));
        // every eavesdropper power below p_max sees one level with 1 < level/p2 <= 9
        for (int g = 0; g < 200; ++g) {
            const double p2 = p0 * std::pow(ratio, g / 200.0);
            bool hit = false;
            for (double lv : lad.levels) hit |= lv / p2 > 1.0 && lv / p2 <= 9.0 * (1 + 1e-12);
            REQUIRE(hit);
        }
        // at p2 = p_max the best ratio is exactly 1: outside the open band
        for (double lv : lad.levels) CHECK(lv / (ratio * p0) <= 1.0);
    }
}

TEST_CASE("dup_and_jam and stitching")
{
    std::mt19937_64 rng(4);
    const std::vector<Complex> s{{0.5, -0.5}, {-0.5, 0.5}};
    const std::vector<std::uint8_t> mask{0, 1};
    const auto clean = dup_and_jam(s, mask, LinkBudget{1, 0, 0}, 2, rng);
    REQUIRE(clean.symbols.size() == 4);
    CHECK(clean.symbols[0] == s[0]);
    CHECK(clean.symbols[1] == s[0]);
    CHECK(clean.symbols[2] == s[1]);
    CHECK(clean.symbols[3] == s[1]);

    const auto jammed = dup_and_jam(s, mask, LinkBudget{1, 0, 5}, 2, rng);
    CHECK(jammed.symbols[0] != s[0]);
    CHECK(jammed.symbols[1] == s[0]);
    CHECK(jammed.symbols[2] == s[1]);
    CHECK(jammed.symbols[3] != s[1]);
    CHECK(receiver_stitch(jammed, mask) == s);

    CHECK_THROWS_AS(dup_and_jam(s, std::vector<std::uint8_t>{0}, LinkBudget{}, 2, rng), SpecError);
    CHECK_THROWS_AS(receiver_stitch(jammed, std::vector<std::uint8_t>{0}), SpecError);
}

TEST_CASE("legitimate receiver is unaffected by jamming")
{
    const QamSpec qam{4};
    const ChannelParams ch;
    std::mt19937_64 rng(5);
    int clean_frames = 0;
    for (int f = 0; f < 1000; ++f) {
        const auto bits = random_bits(2040, rng);
        const auto sym = qam_modulate(bits, qam);
        const auto mask = random_jam_mask(sym.size(), rng);
        const auto frame = dup_and_jam(sym, mask, LinkBudget{ch.p1, ch.p0, 9 * ch.p1}, 2, rng);
        if (qam_demodulate(receiver_stitch(frame, mask), qam) == bits) ++clean_frames;
    }
    CHECK(clean_frames >= 999);

    // wrong mask: every pick is a jammed copy, BER of a ratio-4 jammed 4-QAM copy is Q(1/2)
    const auto bits = random_bits(200000, rng);
    const auto sym = qam_modulate(bits, qam);
    const auto mask = random_jam_mask(sym.size(), rng);
    const auto frame = dup_and_jam(sym, mask, LinkBudget{ch.p2, ch.p0, 4 * ch.p2}, 2, rng);
    std::vector<std::uint8_t> inverted(mask);
    for (auto& m : inverted) m ^= 1u;
    const double wrong = bit_error_rate(qam_demodulate(receiver_stitch(frame, inverted), qam), bits);
    CHECK(wrong == doctest::Approx(0.3085375387259869).epsilon(0.03));
    CHECK(bit_error_rate(qam_demodulate(receiver_stitch(frame, mask), qam), bits) == 0.0);

    const auto eve = eavesdrop(frame, EavesdropStrategy::random_pick, qam, bits, rng);
    CHECK(eve.ber >= 0.10);
    CHECK(eve.ber == doctest::Approx(0.5 * 0.3085375387259869).epsilon(0.05));
}

TEST_CASE("eavesdropper strategies")
{
    const QamSpec qam{4};
    std::mt19937_64 rng(6);
    const auto bits = random_bits(200000, rng);
    const auto sym = qam_modulate(bits, qam);
    const auto mask = random_jam_mask(sym.size(), rng);
    const double p2 = db(3), p0 = 1;

    // no jamming: thermal-only BER, Q(sqrt(2 Eb/N0)) for 4-QAM
    const auto open = dup_and_jam(sym, mask, LinkBudget{p2, p0, 0}, 2, rng);
    const double thermal = q_function(std::sqrt(2 * p2 / p0));
    CHECK(eavesdrop(open, EavesdropStrategy::random_pick, qam, bits, rng).ber ==
          doctest::Approx(thermal).epsilon(0.05));

    // far outside the band the jammed copies stand out by energy
    const auto loud = dup_and_jam(sym, mask, LinkBudget{p2, p0, 100 * p2}, 2, rng);
    const double energy = eavesdrop(loud, EavesdropStrategy::energy_threshold, qam, bits, rng).ber;
    const double pick = eavesdrop(loud, EavesdropStrategy::random_pick, qam, bits, rng).ber;
    CHECK(energy < 2 * thermal);
    CHECK(pick > 0.2);

    const auto avg = eavesdrop(loud, EavesdropStrategy::average_both, qam, bits, rng);
    CHECK(avg.ber > thermal);
    CHECK(avg.bits.size() == bits.size());
}

TEST_CASE("OFDM output is close to Gaussian")
{
    const auto one = ofdm_gaussianity_demo(1, QamSpec{4}, 10000, 1);
    CHECK(one.p_value < 0.01);
    CHECK(one.excess_kurtosis == doctest::Approx(-2.0).epsilon(0.01));
    const auto wide = ofdm_gaussianity_demo(1024, QamSpec{4}, 10, 1);
    CHECK(wide.samples == 10240);
    CHECK(wide.p_value >= 0.01);
    CHECK(std::abs(wide.excess_kurtosis) <= 0.1);
    const auto wide16 = ofdm_gaussianity_demo(1024, QamSpec{16}, 10, 2);
    CHECK(std::abs(wide16.excess_kurtosis) <= 0.1);
}
