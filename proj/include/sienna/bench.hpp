#pragma once

#include "sienna/bits.hpp"
#include "sienna/gf_rs.hpp"
#include "sienna/phy_jam.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sienna {

// ---- randomness tests (frequency, runs, approximate entropy) ----

struct RandomnessReport {
    std::size_t bits = 0;
    double monobit_p = 0;
    double runs_p = 0;
    unsigned apen_block = 0;        // m
    double approx_entropy = 0;      // ApEn(m), nats
    double approx_entropy_per_bit = 0; // ApEn / ln 2, clamped to [0, 1]
    double apen_p = 0;

    bool passes(double alpha = 0.01) const { return monobit_p >= alpha && runs_p >= alpha && apen_p >= alpha; }
};

// Default block length: min(10, max(1, floor(log2 n) - 6)).
unsigned default_apen_block(std::size_t n_bits);

// Throws SpecError below 100 bits. A runs test whose frequency prerequisite
// fails reports p = 0.
RandomnessReport randomness_tests(const BitString& bits, std::optional<unsigned> apen_block = std::nullopt);

// ---- experiment configuration ----

enum class Scenario {
    separation,
    fingerprint_similarity,
    commitment_entropy,
    rs_timing,
    adversarial_ber,
    pairing_success
};

std::string scenario_name(Scenario s);
std::optional<Scenario> parse_scenario(const std::string& name);
const std::vector<Scenario>& all_scenarios();

struct ExperimentConfig {
    Scenario scenario = Scenario::pairing_success;
    std::vector<std::uint64_t> seeds{1};
    std::size_t trials = 0;       // 0: scenario default
    std::size_t population = 20;
    std::size_t partners = 10;    // scenes per subject in fingerprint-similarity
    std::vector<double> durations{6, 12, 18, 24, 30, 36, 42, 48, 54, 60};
    std::optional<RsCodeSpec> rs; // unset: scenario default
    std::vector<unsigned> parity{16, 32, 54}; // rs-timing, over GF(2^8) with M = 255
    ChannelParams channel{};
    unsigned qam = 4;
    std::size_t grid_points = 20; // adversarial-ber p2 grid over [p0, p_max]
    std::size_t ber_trials = 20;  // full-ladder trials per grid point for the BER report
    std::size_t timing_reps = 41;
    std::string output_path;      // empty: nothing is written

    // Throws SpecError on an invalid combination.
    void validate() const;
    std::size_t trials_or_default() const;
    RsCodeSpec rs_or_default() const;
};

// Flat "key = value" lines; '#' starts a comment. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {});
void write_config(std::ostream& os, const ExperimentConfig& cfg);

// ---- experiments ----

struct Gate {
    std::string name;
    bool pass = false;
    double value = 0;
    double threshold = 0;
};

struct ExperimentResult {
    Scenario scenario{};
    nlohmann::ordered_json summary;
    std::vector<Gate> gates;
    std::vector<std::string> files; // written artifacts

    bool passed() const;
};

// Deterministic for a given config, except rs-timing which measures wall time.
// With a non-empty output_path, writes <scenario>.csv (plus any extra tables)
// and <scenario>_summary.json there.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// CSV headers, one entry per file.
struct CsvSchema {
    std::string file;
    std::string header;
};
std::vector<CsvSchema> csv_schemas(Scenario s);

// ---- self test ----

struct SelftestReport {
    std::size_t rs_patterns = 0;       // error patterns of weight <= t tried on (2^3, 7, 3)
    std::size_t rs_failures = 0;
    bool rs_corrects_exactly_t = false; // some weight t+1 pattern is not corrected
    std::size_t commit_patterns = 0;   // all fingerprint corruptions of (2^3, 7, 3)
    std::size_t commit_mismatches = 0; // open outcome disagreeing with "weight <= t"
    bool passed() const { return rs_failures == 0 && rs_corrects_exactly_t && commit_mismatches == 0; }
};

SelftestReport run_selftest();

// run <scenario> | selftest | dump-config; flags --config, --seed, --out, --check.
// Exit codes: 0 ok, 1 failed --check gates or self test, 2 usage or I/O errors.
int cli_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace sienna
