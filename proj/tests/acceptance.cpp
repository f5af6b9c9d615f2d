// One PASS/FAIL line per acceptance criterion. Exit status is 0 when every
// selected criterion passes.
#include "sienna/bench.hpp"
#include "sienna/fuzzy_commit.hpp"
#include "sienna/gf_rs.hpp"
#include "sienna/phy_jam.hpp"
#include "sienna/rng.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

using namespace sienna;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string gate_text(const ExperimentResult& r)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < r.gates.size(); ++i)
        os << (i ? "; " : "") << r.gates[i].name << ": " << r.gates[i].value << (r.gates[i].pass ? " ok" : " MISS");
    return os.str();
}

Verdict from_experiment(ExperimentConfig cfg)
{
    const auto r = run_experiment(cfg);
    return {r.passed(), gate_text(r)};
}

Verdict criterion_1()
{
    const auto st = run_selftest();
    const ReedSolomon code(make_rs_spec(8, 255, 201));
    std::mt19937_64 rng(0xC1);
    std::size_t bad = 0;
    const std::size_t trials = 10000;
    for (std::size_t i = 0; i < trials; ++i) {
        std::vector<Symbol> msg(201);
        for (auto& s : msg) s = static_cast<Symbol>(rng() & 0xFF);
        auto cw = code.encode(msg);
        std::vector<std::size_t> pos(255);
        std::iota(pos.begin(), pos.end(), 0);
        std::shuffle(pos.begin(), pos.end(), rng);
        const std::size_t e = rng() % 28;
        for (std::size_t j = 0; j < e; ++j) cw[pos[j]] ^= static_cast<Symbol>(1 + rng() % 255);
        const auto out = code.decode(cw);
        bad += !(out && *out == msg);
    }
    std::ostringstream os;
    os << "(2^3,7,3): " << st.rs_patterns << " patterns, " << st.rs_failures << " failures, corrects exactly t="
       << (st.rs_corrects_exactly_t ? "yes" : "no") << "; (2^8,255,201): " << bad << "/" << trials << " failures at <=27 errors";
    return {st.rs_failures == 0 && st.rs_corrects_exactly_t && bad == 0, os.str()};
}

Verdict criterion_2()
{
    const auto st = run_selftest();
    const auto spec = make_rs_spec(8, 255, 201);
    const ReedSolomon code(spec);
    HashDrbg drbg(0xC2, "acceptance-binding");
    std::size_t false_recoveries = 0;
    const std::size_t trials = 10000;
    for (std::size_t i = 0; i < trials; ++i) {
        const Salt salt = random_salt(spec, drbg);
        const Fingerprint f{drbg.bits(spec.codeword_bits())};
        const Fingerprint wrong{drbg.bits(spec.codeword_bits())};
        const auto o = open(commit(salt, f, code), wrong, code);
        false_recoveries += o.recovered();
    }
    std::ostringstream os;
    os << "exhaustive: " << st.commit_patterns << " corruptions, " << st.commit_mismatches
       << " disagreements with weight<=t; random wrong fingerprints: " << false_recoveries << "/" << trials
       << " recoveries";
    return {st.commit_mismatches == 0 && false_recoveries == 0, os.str()};
}

Verdict criterion_3()
{
    ExperimentConfig cfg;
    cfg.scenario = Scenario::separation;
    cfg.trials = 100;
    return from_experiment(cfg);
}

Verdict criterion_4()
{
    ExperimentConfig cfg;
    cfg.scenario = Scenario::fingerprint_similarity;
    cfg.population = 20;
    cfg.partners = 10;
    const auto r = run_experiment(cfg);
    std::ostringstream os;
    os << gate_text(r) << "; same@6s " << r.summary["curve"].front()["same_mean"].get<double>() << ", same@60s "
       << r.summary["curve"].back()["same_mean"].get<double>() << ", cross@60s "
       << r.summary["curve"].back()["cross_mean"].get<double>() << " (reference 0.63 / 0.05)";
    return {r.passed(), os.str()};
}

Verdict criterion_5()
{
    bool pass = true;
    std::ostringstream os;
    const std::size_t n_sym = 1000000;
    for (unsigned m : {4u, 16u})
        for (int db : {5, 10, 15}) {
            const double snr = std::pow(10.0, db / 10.0);
            const auto meas = simulate_ber(m, snr, n_sym, 0xC5 * 100 + m + static_cast<unsigned>(db));
            const double th = ber_theoretical(m, snr);
            const double se = std::sqrt(th * (1 - th) / static_cast<double>(meas.bits));
            const double tol = std::max(0.15 * th, 3 * se);
            const bool ok = std::abs(meas.ber - th) <= tol;
            pass = pass && ok;
            char buf[200];
            std::snprintf(buf, sizeof buf, "%sM=%u %ddB meas %.3g theory %.3g gray %.3g%s", os.tellp() ? "; " : "", m, db,
                          meas.ber, th, ber_gray_approx(m, snr), ok ? "" : " MISS");
            os << buf;
        }
    return {pass, os.str()};
}

Verdict criterion_6()
{
    const QamSpec qam{4};
    const double p0 = 1.0, p1 = 31.62, p2 = 31.62;
    const std::size_t frames = 1000, bits = 2040;
    std::ostringstream os;
    bool pass = true;
    // 15 dB: zero residual errors at every jam power; 5 dB: equal BER within Monte Carlo error
    for (double snr_p1 : {p1, std::pow(10.0, 0.5)}) {
        std::vector<double> bers;
        for (double jam : {0.0, p2, 9 * p2}) {
            std::mt19937_64 rng(mix_seed(0xC6, static_cast<std::uint64_t>(jam * 100 + snr_p1)));
            std::size_t errors = 0;
            for (std::size_t f = 0; f < frames; ++f) {
                BitString tx;
                for (std::size_t i = 0; i < bits; ++i) tx.push_back(rng() & 1);
                const auto sym = qam_modulate(tx, qam);
                const auto mask = random_jam_mask(sym.size(), rng);
                const auto frame = dup_and_jam(sym, mask, LinkBudget{snr_p1, p0, jam}, qam.bits_per_symbol(), rng);
                const auto rx = qam_demodulate(receiver_stitch(frame, mask), qam);
                for (std::size_t i = 0; i < bits; ++i) errors += rx[i] != tx[i];
            }
            bers.push_back(static_cast<double>(errors) / static_cast<double>(frames * bits));
        }
        const double n = static_cast<double>(frames * bits);
        const double mean_ber = (bers[0] + bers[1] + bers[2]) / 3;
        const double se = std::sqrt(std::max(mean_ber, 1.0 / n) * (1 - mean_ber) / n);
        bool invariant = true;
        for (double b : bers) invariant = invariant && std::abs(b - mean_ber) <= 4 * se;
        const bool zero = snr_p1 != p1 || (bers[0] == 0 && bers[1] == 0 && bers[2] == 0);
        pass = pass && invariant && zero;
        char buf[200];
        std::snprintf(buf, sizeof buf, "%sSNR %.0f dB: BER %.3g / %.3g / %.3g at jam 0 / p2 / 9p2%s", os.tellp() ? "; " : "",
                      10 * std::log10(snr_p1 / p0), bers[0], bers[1], bers[2], invariant && zero ? "" : " MISS");
        os << buf;
    }
    return {pass, os.str()};
}

Verdict criterion_7()
{
    ExperimentConfig cfg;
    cfg.scenario = Scenario::adversarial_ber;
    cfg.trials = 1000;
    cfg.grid_points = 20;
    const auto r = run_experiment(cfg);
    std::ostringstream os;
    os << gate_text(r) << "; random-pick aggregated BER median "
       << r.summary["random_pick_aggregated_ber_median"].get<double>() << " (reference band 0.41-0.50)";
    return {r.passed(), os.str()};
}

Verdict criterion_8()
{
    ExperimentConfig cfg;
    cfg.scenario = Scenario::pairing_success;
    cfg.trials = 100;
    return from_experiment(cfg);
}

Verdict criterion_9()
{
    ExperimentConfig cfg;
    cfg.scenario = Scenario::commitment_entropy;
    cfg.trials = 10000;
    const auto r = run_experiment(cfg);
    const auto& s = r.summary["per_seed"].front();
    std::ostringstream os;
    os << gate_text(r) << "; ApEn/bit salts " << s["salt_apen_per_bit"].get<double>() << ", commitments "
       << s["commitment_apen_per_bit"].get<double>() << ", difference " << s["difference_in_standard_errors"].get<double>()
       << " SE";
    return {r.passed(), os.str()};
}

Verdict criterion_10()
{
    ExperimentConfig cfg;
    cfg.scenario = Scenario::rs_timing;
    return from_experiment(cfg);
}

const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
    {"RS correctness", criterion_1},
    {"fuzzy commitment completeness and binding", criterion_2},
    {"JADE source recovery", criterion_3},
    {"fingerprint similarity behaviour", criterion_4},
    {"BER formula vs Monte Carlo", criterion_5},
    {"dialog-code asymmetry", criterion_6},
    {"insider defeat", criterion_7},
    {"end-to-end pairing", criterion_8},
    {"entropy direction", criterion_9},
    {"RS decode timing flatness", criterion_10},
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance checks"};
    std::vector<unsigned> selected;
    app.add_option("--criterion", selected, "criterion number(s) 1-10; default all")->check(CLI::Range(1u, 10u));
    CLI11_PARSE(app, argc, argv);
    if (selected.empty())
        for (unsigned i = 1; i <= criteria.size(); ++i) selected.push_back(i);

    bool all = true;
    for (unsigned c : selected) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[c - 1].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %u %s: %s [%s] (%.1f s)\n", c, v.pass ? "PASS" : "FAIL", criteria[c - 1].first.c_str(),
                    v.detail.c_str(), secs);
        std::fflush(stdout);
        all = all && v.pass;
    }
    return all ? 0 : 1;
}
