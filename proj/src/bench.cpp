#include "sienna/bench.hpp"

#include "sienna/errors.hpp"
#include "sienna/fuzzy_commit.hpp"
#include "sienna/pairing.hpp"
#include "sienna/pipeline.hpp"
#include "sienna/rng.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace sienna {

// ---- randomness ----

unsigned default_apen_block(std::size_t n_bits)
{
    const int lg = static_cast<int>(std::floor(std::log2(static_cast<double>(std::max<std::size_t>(n_bits, 2)))));
    return static_cast<unsigned>(std::clamp(lg - 6, 1, 10));
}

namespace {

double apen_phi(const BitString& bits, unsigned m)
{
    if (m == 0) return 0.0;
    const std::size_t n = bits.size();
    const std::uint32_t mask = (1u << m) - 1;
    std::vector<std::uint64_t> counts(std::size_t{1} << m, 0);
    std::uint32_t w = 0;
    // prime with the first m - 1 bits; the sequence wraps around
    for (unsigned i = 0; i + 1 < m; ++i) w = (w << 1) | bits[i];
    for (std::size_t i = 0; i < n; ++i) {
        w = ((w << 1) | bits[(i + m - 1) % n]) & mask;
        ++counts[w];
    }
    double phi = 0;
    for (auto c : counts)
        if (c) {
            const double p = static_cast<double>(c) / static_cast<double>(n);
            phi += p * std::log(p);
        }
    return phi;
}

} // namespace

RandomnessReport randomness_tests(const BitString& bits, std::optional<unsigned> apen_block)
{
    const std::size_t n = bits.size();
    require(n >= 100, "randomness_tests: need at least 100 bits");
    const double nd = static_cast<double>(n);
    RandomnessReport r;
    r.bits = n;

    const double ones = static_cast<double>(bits.popcount());
    const double s = 2.0 * ones - nd;
    r.monobit_p = std::erfc(std::abs(s) / std::sqrt(nd) / std::sqrt(2.0));

    const double pi = ones / nd;
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(nd)) {
        r.runs_p = 0.0;
    } else {
        std::size_t v = 1;
        for (std::size_t i = 1; i < n; ++i) v += bits[i] != bits[i - 1];
        const double num = std::abs(static_cast<double>(v) - 2.0 * nd * pi * (1 - pi));
        r.runs_p = std::erfc(num / (2.0 * std::sqrt(2.0 * nd) * pi * (1 - pi)));
    }

    const unsigned m = apen_block.value_or(default_apen_block(n));
    require(m >= 1 && m <= 20, "randomness_tests: approximate entropy block length must be in [1, 20]");
    r.apen_block = m;
    r.approx_entropy = apen_phi(bits, m) - apen_phi(bits, m + 1);
    r.approx_entropy_per_bit = std::clamp(r.approx_entropy / std::log(2.0), 0.0, 1.0);
    const double chi2 = std::max(0.0, 2.0 * nd * (std::log(2.0) - r.approx_entropy));
    r.apen_p = boost::math::gamma_q(std::ldexp(1.0, static_cast<int>(m) - 1), chi2 / 2.0);
    return r;
}

// ---- configuration ----

namespace {

struct ScenarioName {
    Scenario s;
    const char* name;
};

constexpr ScenarioName scenario_names[] = {
    {Scenario::separation, "separation"},
    {Scenario::fingerprint_similarity, "fingerprint-similarity"},
    {Scenario::commitment_entropy, "commitment-entropy"},
    {Scenario::rs_timing, "rs-timing"},
    {Scenario::adversarial_ber, "adversarial-ber"},
    {Scenario::pairing_success, "pairing-success"},
};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& v)
{
    T x{};
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, x);
    if (res.ec != std::errc{} || res.ptr != end) throw SpecError("config: bad value for " + key + ": '" + v + "'");
    return x;
}

// from_chars for double is available in libstdc++ 11
double parse_double(const std::string& key, const std::string& v)
{
    return parse_number<double>(key, v);
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw SpecError("config: bad boolean for " + key + ": '" + v + "'");
}

std::string join_numbers(const auto& xs)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
    return os.str();
}

} // namespace

std::string scenario_name(Scenario s)
{
    for (const auto& n : scenario_names)
        if (n.s == s) return n.name;
    return "?";
}

std::optional<Scenario> parse_scenario(const std::string& name)
{
    for (const auto& n : scenario_names)
        if (name == n.name) return n.s;
    return std::nullopt;
}

const std::vector<Scenario>& all_scenarios()
{
    static const std::vector<Scenario> all = [] {
        std::vector<Scenario> v;
        for (const auto& n : scenario_names) v.push_back(n.s);
        return v;
    }();
    return all;
}

void ExperimentConfig::validate() const
{
    require(!seeds.empty(), "config: at least one seed is required");
    require(!durations.empty(), "config: durations must not be empty");
    for (double d : durations) require(d >= 6.0 && d <= 60.0, "config: durations must lie in [6, 60] s");
    require(population >= 2, "config: population must be at least 2");
    require(partners >= 1 && partners < population, "config: partners must be in [1, population)");
    QamSpec{qam}.validate();
    channel.validate();
    if (rs) rs->validate();
    require(!parity.empty(), "config: parity list must not be empty");
    for (unsigned k : parity) require(k >= 2 && k < 255, "config: parity lengths must be in [2, 254]");
    require(grid_points >= 2, "config: grid_points must be at least 2");
    require(timing_reps >= 1, "config: timing_reps must be at least 1");
}

std::size_t ExperimentConfig::trials_or_default() const
{
    if (trials) return trials;
    switch (scenario) {
    case Scenario::separation: return 100;
    case Scenario::commitment_entropy: return 10000;
    case Scenario::adversarial_ber: return 1000;
    case Scenario::pairing_success: return 100;
    default: return 1;
    }
}

RsCodeSpec ExperimentConfig::rs_or_default() const
{
    if (rs) return *rs;
    if (scenario == Scenario::commitment_entropy) return make_rs_spec(8, 255, 201);
    return default_pairing_code();
}

ExperimentConfig parse_config(std::istream& is, ExperimentConfig cfg)
{
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw SpecError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));
        if (key == "scenario") {
            const auto s = parse_scenario(v);
            if (!s) throw SpecError("config: unknown scenario '" + v + "'");
            cfg.scenario = *s;
        } else if (key == "seeds" || key == "seed") {
            cfg.seeds.clear();
            for (const auto& x : split_list(v)) cfg.seeds.push_back(parse_number<std::uint64_t>(key, x));
        } else if (key == "trials") {
            cfg.trials = parse_number<std::size_t>(key, v);
        } else if (key == "population") {
            cfg.population = parse_number<std::size_t>(key, v);
        } else if (key == "partners") {
            cfg.partners = parse_number<std::size_t>(key, v);
        } else if (key == "durations") {
            cfg.durations.clear();
            for (const auto& x : split_list(v)) cfg.durations.push_back(parse_double(key, x));
        } else if (key == "rs") {
            const auto parts = split_list(v);
            if (parts.size() != 3) throw SpecError("config: rs expects k,m,n");
            cfg.rs = make_rs_spec(parse_number<unsigned>(key, parts[0]), parse_number<unsigned>(key, parts[1]),
                                  parse_number<unsigned>(key, parts[2]));
        } else if (key == "parity") {
            cfg.parity.clear();
            for (const auto& x : split_list(v)) cfg.parity.push_back(parse_number<unsigned>(key, x));
        } else if (key == "channel.p0") {
            cfg.channel.p0 = parse_double(key, v);
        } else if (key == "channel.p1") {
            cfg.channel.p1 = parse_double(key, v);
        } else if (key == "channel.p2") {
            cfg.channel.p2 = parse_double(key, v);
        } else if (key == "channel.p_jam") {
            cfg.channel.p_jam = parse_double(key, v);
        } else if (key == "channel.p_max") {
            cfg.channel.p_max = parse_double(key, v);
        } else if (key == "channel.seed") {
            cfg.channel.seed = parse_number<std::uint64_t>(key, v);
        } else if (key == "qam") {
            cfg.qam = parse_number<unsigned>(key, v);
        } else if (key == "grid_points") {
            cfg.grid_points = parse_number<std::size_t>(key, v);
        } else if (key == "ber_trials") {
            cfg.ber_trials = parse_number<std::size_t>(key, v);
        } else if (key == "timing_reps") {
            cfg.timing_reps = parse_number<std::size_t>(key, v);
        } else if (key == "output") {
            cfg.output_path = v;
        } else {
            throw SpecError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

void write_config(std::ostream& os, const ExperimentConfig& cfg)
{
    os << "scenario = " << scenario_name(cfg.scenario) << '\n';
    os << "seeds = " << join_numbers(cfg.seeds) << '\n';
    os << "trials = " << cfg.trials_or_default() << '\n';
    os << "population = " << cfg.population << '\n';
    os << "partners = " << cfg.partners << '\n';
    os << "durations = " << join_numbers(cfg.durations) << '\n';
    const auto rs = cfg.rs_or_default();
    os << "rs = " << rs.k_bits() << ',' << rs.m_symbols << ',' << rs.n_symbols << '\n';
    os << "parity = " << join_numbers(cfg.parity) << '\n';
    os << "channel.p0 = " << cfg.channel.p0 << '\n';
    os << "channel.p1 = " << cfg.channel.p1 << '\n';
    os << "channel.p2 = " << cfg.channel.p2 << '\n';
    os << "channel.p_jam = " << cfg.channel.p_jam << '\n';
    os << "channel.p_max = " << cfg.channel.p_max << '\n';
    os << "channel.seed = " << cfg.channel.seed << '\n';
    os << "qam = " << cfg.qam << '\n';
    os << "grid_points = " << cfg.grid_points << '\n';
    os << "ber_trials = " << cfg.ber_trials << '\n';
    os << "timing_reps = " << cfg.timing_reps << '\n';
    os << "output = " << cfg.output_path << '\n';
}

bool ExperimentResult::passed() const
{
    return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.pass; });
}

std::vector<CsvSchema> csv_schemas(Scenario s)
{
    switch (s) {
    case Scenario::separation:
        return {{"separation.csv", "seed,trial,source,correlation,converged,sweeps,low_confidence"}};
    case Scenario::fingerprint_similarity:
        return {{"fingerprint-similarity.csv", "seed,subject,partner,duration_s,same_similarity,cross_similarity"}};
    case Scenario::commitment_entropy:
        return {{"commitment-entropy.csv", "seed,stream,bits,monobit_p,runs_p,apen_block,apen_per_bit,apen_p"}};
    case Scenario::rs_timing:
        return {{"rs-timing.csv", "parity_symbols,errors,median_us,p10_us,p90_us,reps"}};
    case Scenario::adversarial_ber:
        return {{"adversarial-ber.csv", "seed,p2,jamming,trial,levels_recovered,salt_recovered"},
                {"eavesdrop-ber.csv", "seed,p2,strategy,trial,level,jam_power,jam_ratio,ber,symbol_error"},
                {"ber-sweep.csv", "m_order,snr_db,ber_theory,ber_measured,trials"}};
    case Scenario::pairing_success:
        return {{"pairing-success.csv",
                 "seed,trial,success,keys_match,failure_stage,failure_level,commit_attempts,best_similarity,"
                 "low_confidence"},
                {"pairing-transcript.jsonl", "one JSON object per message of the first trial"}};
    }
    return {};
}

// ---- experiments ----

namespace {

// Fixed-point text so that artifacts are byte-stable.
std::string fmt(double x, int digits = 6)
{
    std::ostringstream os;
    os << std::setprecision(digits) << x;
    return os.str();
}

class CsvOut {
public:
    CsvOut(const ExperimentConfig& cfg, const std::string& file, const std::string& header, ExperimentResult& res)
    {
        if (cfg.output_path.empty()) return;
        const auto path = std::filesystem::path(cfg.output_path) / file;
        os_.open(path);
        if (!os_) throw std::runtime_error("cannot write " + path.string());
        os_ << header << '\n';
        res.files.push_back(path.string());
    }

    template <class... Ts>
    void row(const Ts&... xs)
    {
        if (!os_.is_open()) return;
        bool first = true;
        ((os_ << (first ? "" : ",") << xs, first = false), ...);
        os_ << '\n';
    }

    std::ostream* stream() { return os_.is_open() ? &os_ : nullptr; }

private:
    std::ofstream os_;
};

void add_gate(ExperimentResult& r, std::string name, bool pass, double value, double threshold)
{
    r.gates.push_back(Gate{std::move(name), pass, value, threshold});
}

double quantile(std::vector<double> v, double q)
{
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> row_vector(const Eigen::MatrixXd& m, Eigen::Index r)
{
    std::vector<double> v(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.cols(); ++i) v[static_cast<std::size_t>(i)] = m(r, i);
    return v;
}

void run_separation(const ExperimentConfig& cfg, ExperimentResult& res)
{
    const auto schema = csv_schemas(cfg.scenario);
    CsvOut csv(cfg, schema[0].file, schema[0].header, res);
    const ScenarioConfig sc;
    const PipelineConfig pc;
    const auto spec = cfg.rs_or_default();
    const std::size_t trials = cfg.trials_or_default();
    std::vector<double> min_corr;
    std::size_t ok = 0, low = 0, unconverged = 0;
    for (auto seed : cfg.seeds)
        for (std::size_t t = 0; t < trials; ++t) {
            const auto scene = make_pairing_scene(sc, mix_seed(seed, t));
            const auto pr = prms_fingerprints(scene.radar, sc.subjects, scene.t_str, scene.t_end, pc, spec);
            double worst = 1.0;
            for (Eigen::Index s = 0; s < scene.mixture.sources.rows(); ++s) {
                const auto m = match_sources(pr.sources, row_vector(scene.mixture.sources, s));
                worst = std::min(worst, m.correlation);
                csv.row(seed, t, s, fmt(m.correlation), int(pr.converged), pr.sweeps, int(pr.low_confidence));
            }
            min_corr.push_back(worst);
            ok += worst >= 0.90;
            low += pr.low_confidence;
            unconverged += !pr.converged;
        }
    const double frac = static_cast<double>(ok) / static_cast<double>(min_corr.size());
    res.summary["trials"] = min_corr.size();
    res.summary["fraction_min_correlation_ge_0.90"] = frac;
    res.summary["min_correlation_median"] = quantile(min_corr, 0.5);
    res.summary["min_correlation_p10"] = quantile(min_corr, 0.1);
    res.summary["low_confidence"] = low;
    res.summary["not_converged"] = unconverged;
    add_gate(res, "matched correlation >= 0.90 in >= 90% of trials", frac >= 0.90, frac, 0.90);
}

void run_fingerprint_similarity(const ExperimentConfig& cfg, ExperimentResult& res)
{
    const auto schema = csv_schemas(cfg.scenario);
    CsvOut csv(cfg, schema[0].file, schema[0].header, res);
    const PipelineConfig pc;
    const auto spec = cfg.rs_or_default();
    std::vector<double> durations = cfg.durations;
    std::sort(durations.begin(), durations.end());
    std::vector<std::vector<double>> same(durations.size()), cross(durations.size());
    for (auto seed : cfg.seeds) {
        std::vector<SubjectProfile> pop;
        for (std::size_t i = 0; i < cfg.population; ++i) pop.push_back(random_profile(mix_seed(seed, 0x9000 + i)));
        for (std::size_t i = 0; i < cfg.population; ++i)
            for (std::size_t k = 1; k <= cfg.partners; ++k) {
                const std::size_t j = (i + k) % cfg.population;
                const auto scene_seed = mix_seed(seed, i * 1000 + k);
                for (std::size_t d = 0; d < durations.size(); ++d) {
                    ScenarioConfig sc;
                    sc.duration_s = durations[d];
                    const auto scene = make_pairing_scene(sc, {pop[i], pop[j]}, scene_seed);
                    const auto belt = extract(standardize(scene.belt, pc.nominal_std), 0, durations[d], pc.bank).bits;
                    const auto pr = prms_fingerprints(scene.radar, 2, 0, durations[d], pc, spec);
                    const auto m = match_sources(pr.sources, row_vector(scene.mixture.sources, 0));
                    const double s_same = hamming_similarity(belt, pr.raw[static_cast<std::size_t>(m.index)]);
                    const double s_cross = hamming_similarity(belt, pr.raw[static_cast<std::size_t>(1 - m.index)]);
                    same[d].push_back(s_same);
                    cross[d].push_back(s_cross);
                    csv.row(seed, i, j, fmt(durations[d]), fmt(s_same), fmt(s_cross));
                }
            }
    }
    nlohmann::ordered_json curve = nlohmann::ordered_json::array();
    double min_step = 1.0;
    for (std::size_t d = 0; d < durations.size(); ++d) {
        curve.push_back({{"duration_s", durations[d]},
                         {"same_mean", mean(same[d])},
                         {"cross_mean", mean(cross[d])},
                         {"scenes", same[d].size()}});
        if (d) min_step = std::min(min_step, mean(same[d]) - mean(same[d - 1]));
    }
    const double gap = mean(same.back()) - mean(cross.back());
    res.summary["curve"] = curve;
    res.summary["gap_at_longest_window"] = gap;
    res.summary["reference_same_similarity_6s"] = 0.63;
    res.summary["reference_cross_similarity"] = 0.05;
    if (durations.size() > 1)
        add_gate(res, "same-subject similarity non-decreasing in window length", min_step >= 0.0, min_step, 0.0);
    add_gate(res, "same minus cross similarity at the longest window >= 0.15", gap >= 0.15, gap, 0.15);
}

void run_commitment_entropy(const ExperimentConfig& cfg, ExperimentResult& res)
{
    const auto schema = csv_schemas(cfg.scenario);
    CsvOut csv(cfg, schema[0].file, schema[0].header, res);
    const auto spec = cfg.rs_or_default();
    const ReedSolomon code(spec);
    const PipelineConfig pc;
    const std::size_t trials = cfg.trials_or_default();
    nlohmann::ordered_json per_seed = nlohmann::ordered_json::array();
    bool direction = true, salts_pass = true;
    double worst_margin = 1.0;
    for (auto seed : cfg.seeds) {
        // one subject's belt fingerprint, reused for every commitment
        const auto subject = random_profile(mix_seed(seed, 0xF1));
        const auto chest = synth_displacement(subject, 0, 60.1, 100.0);
        BeltParams bp;
        bp.noise_std = 0.005;
        bp.seed = mix_seed(seed, 0xF2);
        const auto belt = belt_observe(chest, bp);
        const auto f = belt_fingerprint(belt, 0, 60, pc, spec);

        HashDrbg drbg(seed, "entropy-salts");
        BitString salts, commits;
        for (std::size_t i = 0; i < trials; ++i) {
            const Salt s = random_salt(spec, drbg);
            salts.append(s.bits);
            commits.append(commit(s, f, code).masked_codeword);
        }
        const auto rs = randomness_tests(salts);
        const auto rc = randomness_tests(commits);
        const auto rf = randomness_tests(f.bits);
        for (auto [name, r] : {std::pair{"salts", &rs}, {"commitments", &rc}, {"fingerprint", &rf}})
            csv.row(seed, name, r->bits, fmt(r->monobit_p), fmt(r->runs_p), r->apen_block, fmt(r->approx_entropy_per_bit, 9),
                    fmt(r->apen_p));
        direction = direction && rc.approx_entropy_per_bit < rs.approx_entropy_per_bit;
        salts_pass = salts_pass && rs.monobit_p >= 0.01 && rs.runs_p >= 0.01;
        worst_margin = std::min(worst_margin, rs.approx_entropy_per_bit - rc.approx_entropy_per_bit);
        // standard error of ApEn from its chi-square law with 2^m degrees of freedom
        const auto se = [](const RandomnessReport& r) {
            return std::sqrt(2.0 * std::ldexp(1.0, static_cast<int>(r.apen_block))) / (2.0 * static_cast<double>(r.bits)) /
                   std::log(2.0);
        };
        per_seed.push_back({{"seed", seed},
                            {"salt_apen_per_bit", rs.approx_entropy_per_bit},
                            {"commitment_apen_per_bit", rc.approx_entropy_per_bit},
                            {"difference_in_standard_errors",
                             (rs.approx_entropy_per_bit - rc.approx_entropy_per_bit) /
                                 std::hypot(se(rs), se(rc))},
                            {"fingerprint_apen_per_bit", rf.approx_entropy_per_bit},
                            {"commitment_entropy_bits_estimate", rc.approx_entropy_per_bit * spec.codeword_bits()},
                            {"salt_monobit_p", rs.monobit_p},
                            {"salt_runs_p", rs.runs_p},
                            {"salt_apen_p", rs.apen_p}});
    }
    res.summary["commitments_per_seed"] = trials;
    res.summary["code"] = {spec.k_bits(), spec.m_symbols, spec.n_symbols};
    res.summary["salt_entropy_bound_per_commitment_bit"] =
        static_cast<double>(spec.message_bits()) / static_cast<double>(spec.codeword_bits());
    res.summary["reference_commitment_entropy_bits"] = 1000;
    res.summary["per_seed"] = per_seed;
    add_gate(res, "commitment approximate entropy per bit below that of salts", direction, worst_margin, 0.0);
    add_gate(res, "salts pass monobit and runs at alpha 0.01", salts_pass, salts_pass ? 1.0 : 0.0, 1.0);
}

void run_rs_timing(const ExperimentConfig& cfg, ExperimentResult& res)
{
    using clock = std::chrono::steady_clock;
    const auto schema = csv_schemas(cfg.scenario);
    CsvOut csv(cfg, schema[0].file, schema[0].header, res);
    nlohmann::ordered_json per_parity = nlohmann::ordered_json::array();
    double worst = 0;
    for (unsigned k : cfg.parity) {
        const auto spec = make_rs_spec(8, 255, 255 - k);
        const ReedSolomon code(spec);
        const unsigned t = correctable_symbols(spec);
        std::mt19937_64 rng(mix_seed(cfg.seeds.front(), k));
        std::vector<std::vector<std::vector<Symbol>>> words(t + 1);
        for (unsigned e = 0; e <= t; ++e)
            for (std::size_t rep = 0; rep < cfg.timing_reps; ++rep) {
                std::vector<Symbol> msg(spec.n_symbols);
                for (auto& s : msg) s = static_cast<Symbol>(rng() & 0xFF);
                auto cw = code.encode(msg);
                std::vector<std::size_t> pos(spec.m_symbols);
                std::iota(pos.begin(), pos.end(), 0);
                std::shuffle(pos.begin(), pos.end(), rng);
                for (unsigned i = 0; i < e; ++i) cw[pos[i]] ^= static_cast<Symbol>(1 + rng() % 255);
                words[e].push_back(std::move(cw));
            }
        std::vector<std::vector<double>> us(t + 1);
        for (unsigned e = 0; e <= t; ++e) (void)code.decode(words[e][0]); // warm-up
        // interleave error counts so drift in machine state hits all of them alike
        for (std::size_t rep = 0; rep < cfg.timing_reps; ++rep)
            for (unsigned e = 0; e <= t; ++e) {
                const auto t0 = clock::now();
                const auto out = code.decode(words[e][rep]);
                const auto t1 = clock::now();
                if (!out) throw std::runtime_error("rs-timing: decode failed within t");
                us[e].push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
            }
        double lo = 1e300, hi = 0;
        for (unsigned e = 0; e <= t; ++e) {
            const double med = quantile(us[e], 0.5);
            lo = std::min(lo, med);
            hi = std::max(hi, med);
            csv.row(k, e, fmt(med), fmt(quantile(us[e], 0.1)), fmt(quantile(us[e], 0.9)), cfg.timing_reps);
        }
        const double variation = (hi - lo) / lo;
        worst = std::max(worst, variation);
        per_parity.push_back({{"parity_symbols", k}, {"t", t}, {"min_median_us", lo}, {"max_median_us", hi},
                              {"variation", variation}});
    }
    res.summary["per_parity"] = per_parity;
    add_gate(res, "decode time variation across 0..t errors < 10%", worst < 0.10, worst, 0.10);
}

void run_adversarial_ber(const ExperimentConfig& cfg, ExperimentResult& res)
{
    const auto schema = csv_schemas(cfg.scenario);
    CsvOut csv(cfg, schema[0].file, schema[0].header, res);
    CsvOut ber_csv(cfg, schema[1].file, schema[1].header, res);
    CsvOut sweep_csv(cfg, schema[2].file, schema[2].header, res);
    const auto spec = cfg.rs_or_default();
    const ReedSolomon code(spec);
    const QamSpec qam{cfg.qam};
    const std::size_t trials = cfg.trials_or_default();
    const auto ladder = ladder_levels(cfg.channel.p_max, cfg.channel.p0);
    const double t_frac = static_cast<double>(correctable_symbols(spec)) / spec.m_symbols;

    nlohmann::ordered_json grid = nlohmann::ordered_json::array();
    double worst_jammed = 0, worst_sanity = 1;
    double min_effective_symbol_error = 1;
    std::vector<double> aggregated_ber;
    const EavesdropStrategy strategies[] = {EavesdropStrategy::random_pick, EavesdropStrategy::energy_threshold,
                                            EavesdropStrategy::average_both};
    const char* strategy_names[] = {"random_pick", "energy_threshold", "average_both"};
    for (std::size_t g = 0; g < cfg.grid_points; ++g) {
        ChannelParams ch = cfg.channel;
        ch.p2 = cfg.channel.p0 *
                std::pow(cfg.channel.p_max / cfg.channel.p0, static_cast<double>(g) / static_cast<double>(cfg.grid_points - 1));
        const bool sanity_gated = ch.p2 >= ch.p1;
        std::size_t rec_on = 0, rec_off = 0, n_off = 0;
        for (auto seed : cfg.seeds) {
            for (std::size_t t = 0; t < trials; ++t) {
                const auto r = insider_trial(code, qam, ch, true, EavesdropStrategy::random_pick, mix_seed(seed, g * 1000003 + t));
                rec_on += r.salt_recovered;
                csv.row(seed, fmt(ch.p2), 1, t, r.levels_recovered, int(r.salt_recovered));
            }
            // without jamming: full trial count where the eavesdropper is at least as
            // well placed as b, a short run elsewhere
            const std::size_t off_trials = sanity_gated ? trials : std::min(trials, cfg.ber_trials);
            for (std::size_t t = 0; t < off_trials; ++t) {
                const auto r =
                    insider_trial(code, qam, ch, false, EavesdropStrategy::random_pick, mix_seed(seed, g * 1000003 + t + 500000));
                rec_off += r.salt_recovered;
                ++n_off;
                csv.row(seed, fmt(ch.p2), 0, t, r.levels_recovered, int(r.salt_recovered));
            }
        }
        const double n_on = static_cast<double>(trials * cfg.seeds.size());
        const double rate_on = static_cast<double>(rec_on) / n_on;
        const double rate_off = static_cast<double>(rec_off) / static_cast<double>(n_off);
        worst_jammed = std::max(worst_jammed, rate_on);
        if (sanity_gated) worst_sanity = std::min(worst_sanity, rate_off);

        nlohmann::ordered_json point{{"p2", ch.p2}, {"recovery_rate_jammed", rate_on},
                                     {"recovery_rate_unjammed", rate_off}, {"unjammed_trials", n_off},
                                     {"sanity_gated", sanity_gated}};
        for (std::size_t si = 0; si < 3; ++si) {
            std::vector<double> agg, eff;
            for (auto seed : cfg.seeds)
                for (std::size_t t = 0; t < cfg.ber_trials; ++t) {
                    const auto r = insider_trial(code, qam, ch, true, strategies[si], mix_seed(seed, g * 7919 + t + 900000), false);
                    for (std::size_t l = 0; l < r.level_ber.size(); ++l) {
                        const double ratio = ladder.levels[l] / ch.p2;
                        ber_csv.row(seed, fmt(ch.p2), strategy_names[si], t, l, fmt(ladder.levels[l]), fmt(ratio),
                                    fmt(r.level_ber[l]), fmt(r.level_symbol_error[l]));
                        if (ratio > 1 && ratio <= 9) {
                            eff.push_back(r.level_ber[l]);
                            if (si == 0) min_effective_symbol_error = std::min(min_effective_symbol_error, r.level_symbol_error[l]);
                        }
                    }
                    agg.push_back(mean(r.level_ber));
                    if (si == 0) aggregated_ber.push_back(agg.back());
                }
            point[std::string(strategy_names[si]) + "_aggregated_ber"] = mean(agg);
            point[std::string(strategy_names[si]) + "_effective_level_ber"] = eff.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(mean(eff));
        }
        grid.push_back(point);
    }

    // BER formula against Monte Carlo
    nlohmann::ordered_json sweep = nlohmann::ordered_json::array();
    for (unsigned m : {4u, 16u})
        for (int db = 0; db <= 15; ++db) {
            const double snr = std::pow(10.0, db / 10.0);
            const std::size_t n_sym = 200000;
            const auto meas = simulate_ber(m, snr, n_sym, mix_seed(cfg.seeds.front(), m * 100 + static_cast<unsigned>(db)));
            sweep_csv.row(m, db, fmt(ber_theoretical(m, snr)), fmt(meas.ber), n_sym);
            sweep.push_back({{"m_order", m}, {"snr_db", db}, {"ber_theory", ber_theoretical(m, snr)},
                             {"ber_gray_approx", ber_gray_approx(m, snr)}, {"ber_measured", meas.ber}});
        }

    std::size_t in_band = 0;
    for (double b : aggregated_ber) in_band += b >= 0.41 && b <= 0.50;
    res.summary["trials_per_point"] = trials;
    res.summary["ladder"] = ladder.levels;
    res.summary["rs_correctable_fraction"] = t_frac;
    res.summary["grid"] = grid;
    res.summary["random_pick_aggregated_ber_median"] = quantile(aggregated_ber, 0.5);
    res.summary["random_pick_aggregated_ber_in_0.41_0.50"] =
        aggregated_ber.empty() ? 0.0 : static_cast<double>(in_band) / static_cast<double>(aggregated_ber.size());
    res.summary["min_effective_level_symbol_error"] = min_effective_symbol_error;
    res.summary["ber_sweep"] = sweep;
    add_gate(res, "insider recovery with the ladder <= 1% at every p2", worst_jammed <= 0.01, worst_jammed, 0.01);
    add_gate(res, "insider recovery without jamming >= 99% where p2 >= p1", worst_sanity >= 0.99, worst_sanity, 0.99);
    add_gate(res, "effective-level symbol error exceeds t/M", min_effective_symbol_error > t_frac,
             min_effective_symbol_error, t_frac);
}

void run_pairing_success(const ExperimentConfig& cfg, ExperimentResult& res)
{
    const auto schema = csv_schemas(cfg.scenario);
    CsvOut csv(cfg, schema[0].file, schema[0].header, res);
    const ScenarioConfig sc;
    const PipelineConfig pc;
    PairingConfig pcfg;
    pcfg.rs = cfg.rs_or_default();
    pcfg.qam = QamSpec{cfg.qam};
    pcfg.channel = cfg.channel;
    const std::size_t trials = cfg.trials_or_default();
    std::size_t ok = 0, total = 0, mismatched = 0;
    std::vector<double> best_sim;
    for (auto seed : cfg.seeds)
        for (std::size_t t = 0; t < trials; ++t) {
            const auto ts = mix_seed(seed, t);
            const auto scene = make_pairing_scene(sc, ts);
            const auto fa = belt_fingerprint(scene.belt, scene.t_str, scene.t_end, pc, pcfg.rs);
            const auto pr = prms_fingerprints(scene.radar, sc.subjects, scene.t_str, scene.t_end, pc, pcfg.rs);
            const auto out = run_pairing(DeviceA{std::nullopt, fa}, DeviceB{std::nullopt, pr.fingerprints}, pcfg, ts);
            double best = 0;
            for (const auto& f : pr.fingerprints) best = std::max(best, hamming_similarity(fa.bits, f.bits));
            best_sim.push_back(best);
            const bool keys_match = out.key_a && out.key_b && *out.key_a == *out.key_b;
            ++total;
            ok += out.success;
            mismatched += out.success && !keys_match;
            csv.row(seed, t, int(out.success), int(keys_match), out.failure ? out.failure->stage : std::string("-"),
                    out.failure ? std::to_string(out.failure->level_index) : std::string("-"), out.commit_attempts,
                    fmt(best), int(pr.low_confidence));
            if (total == 1 && !cfg.output_path.empty()) {
                const auto path = std::filesystem::path(cfg.output_path) / schema[1].file;
                std::ofstream js(path);
                if (!js) throw std::runtime_error("cannot write " + path.string());
                write_transcript_jsonl(js, out.transcript);
                res.files.push_back(path.string());
            }
        }
    const double rate = static_cast<double>(ok) / static_cast<double>(total);
    res.summary["trials"] = total;
    res.summary["successes"] = ok;
    res.summary["success_rate"] = rate;
    res.summary["best_similarity_median"] = quantile(best_sim, 0.5);
    res.summary["key_mismatches"] = mismatched;
    add_gate(res, "pairing success rate > 0.90", rate > 0.90, rate, 0.90);
    add_gate(res, "identical keys in every success", mismatched == 0, static_cast<double>(mismatched), 0.0);
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    if (!cfg.output_path.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.output_path, ec);
        if (ec) throw std::runtime_error("cannot create output directory " + cfg.output_path + ": " + ec.message());
    }
    ExperimentResult res;
    res.scenario = cfg.scenario;
    res.summary["scenario"] = scenario_name(cfg.scenario);
    res.summary["seeds"] = cfg.seeds;
    switch (cfg.scenario) {
    case Scenario::separation: run_separation(cfg, res); break;
    case Scenario::fingerprint_similarity: run_fingerprint_similarity(cfg, res); break;
    case Scenario::commitment_entropy: run_commitment_entropy(cfg, res); break;
    case Scenario::rs_timing: run_rs_timing(cfg, res); break;
    case Scenario::adversarial_ber: run_adversarial_ber(cfg, res); break;
    case Scenario::pairing_success: run_pairing_success(cfg, res); break;
    }
    nlohmann::ordered_json gates = nlohmann::ordered_json::array();
    for (const auto& g : res.gates)
        gates.push_back({{"name", g.name}, {"pass", g.pass}, {"value", g.value}, {"threshold", g.threshold}});
    res.summary["gates"] = gates;
    res.summary["passed"] = res.passed();
    if (!cfg.output_path.empty()) {
        const auto path = std::filesystem::path(cfg.output_path) / (scenario_name(cfg.scenario) + "_summary.json");
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot write " + path.string());
        os << res.summary.dump(2) << '\n';
        res.files.push_back(path.string());
    }
    return res;
}

// ---- self test ----

SelftestReport run_selftest()
{
    const auto spec = make_rs_spec(3, 7, 3);
    const ReedSolomon code(spec);
    const unsigned t = correctable_symbols(spec);
    SelftestReport r;

    // every error pattern of weight <= t + 1 on a few messages
    bool beyond_t_corrected = false;
    for (Symbol m0 : {0, 3, 7})
        for (Symbol m1 : {0, 5}) {
            const std::vector<Symbol> msg{m0, m1, 6};
            const auto cw = code.encode(msg);
            for (std::uint32_t pattern = 0; pattern < (1u << 21); ++pattern) {
                std::vector<Symbol> rx = cw;
                unsigned weight = 0;
                for (unsigned p = 0; p < 7; ++p) {
                    const auto e = static_cast<Symbol>((pattern >> (3 * p)) & 7);
                    rx[p] ^= e;
                    weight += e != 0;
                }
                if (weight > t + 1) continue;
                const auto out = code.decode(rx);
                if (weight <= t) {
                    ++r.rs_patterns;
                    r.rs_failures += !(out && *out == msg);
                } else if (out && *out == msg) {
                    beyond_t_corrected = true;
                }
            }
        }
    r.rs_corrects_exactly_t = r.rs_failures == 0 && !beyond_t_corrected;

    // open succeeds iff the fingerprint corruption has symbol weight <= t
    HashDrbg drbg(1, "selftest");
    const Salt salt = random_salt(spec, drbg);
    const Fingerprint f{drbg.bits(spec.codeword_bits())};
    const auto c = commit(salt, f, code);
    for (std::uint32_t pattern = 0; pattern < (1u << 21); ++pattern) {
        Fingerprint g = f;
        unsigned weight = 0;
        for (unsigned p = 0; p < 7; ++p) {
            const unsigned e = (pattern >> (3 * p)) & 7;
            weight += e != 0;
            for (unsigned j = 0; j < 3; ++j)
                if ((e >> (2 - j)) & 1) g.bits.flip(p * 3 + j);
        }
        const auto o = open(c, g, code);
        ++r.commit_patterns;
        const bool expect = weight <= t;
        r.commit_mismatches += (o.recovered() && o.salt == salt) != expect;
    }
    return r;
}

} // namespace sienna
