#include "sienna/bench.hpp"

#include "sienna/errors.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace sienna {

namespace {

std::string schema_footer()
{
    std::ostringstream os;
    os << "\nOutput files (CSV headers):\n";
    for (auto s : all_scenarios())
        for (const auto& c : csv_schemas(s)) os << "  " << c.file << ": " << c.header << '\n';
    os << "  <scenario>_summary.json: summary metrics and gate results\n";
    os << "\nSIENNA_SEED sets the default seed. Exit codes: 0 ok, 1 failed gates or self test, 2 usage or I/O error.\n";
    return os.str();
}

std::optional<std::uint64_t> env_seed()
{
    const char* v = std::getenv("SIENNA_SEED");
    if (!v || !*v) return std::nullopt;
    char* end = nullptr;
    const auto x = std::strtoull(v, &end, 10);
    if (*end) throw SpecError(std::string("SIENNA_SEED is not an unsigned integer: '") + v + "'");
    return x;
}

} // namespace

int cli_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"sienna-bench: experiments for radar-assisted device pairing"};
    app.footer(schema_footer());
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::uint64_t> seeds;
    bool check = false;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--seed", seeds, "seed(s); overrides the config and SIENNA_SEED");
    app.add_option("--out", out_dir, "output directory for CSV and JSON artifacts");
    app.add_flag("--check", check, "exit 1 when any acceptance gate fails");

    std::string scenario_arg;
    auto* run = app.add_subcommand("run", "run one experiment scenario")->fallthrough();
    std::vector<std::string> names;
    for (auto s : all_scenarios()) names.push_back(scenario_name(s));
    run->add_option("scenario", scenario_arg, "scenario name")->required()->check(CLI::IsMember(names));
    auto* self = app.add_subcommand("selftest", "exhaustive checks on a small code")->fallthrough();
    auto* dump = app.add_subcommand("dump-config", "print the effective configuration")->fallthrough();
    std::string dump_scenario;
    dump->add_option("scenario", dump_scenario, "scenario name")->check(CLI::IsMember(names));

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*self) {
            const auto r = run_selftest();
            out << "rs (2^3,7,3): " << r.rs_patterns << " patterns of weight <= t, " << r.rs_failures << " failures; "
                << (r.rs_corrects_exactly_t ? "no" : "some") << " weight t+1 pattern restored\n";
            out << "commitments: " << r.commit_patterns << " fingerprint corruptions, " << r.commit_mismatches
                << " mismatches\n";
            out << (r.passed() ? "selftest passed\n" : "selftest FAILED\n");
            return r.passed() ? 0 : 1;
        }

        ExperimentConfig cfg;
        if (auto s = env_seed()) cfg.seeds = {*s};
        const std::string& sname = *run ? scenario_arg : dump_scenario;
        if (!sname.empty()) cfg.scenario = *parse_scenario(sname);
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) {
                err << "error: cannot open config file " << config_path << '\n';
                return 2;
            }
            cfg = parse_config(is, cfg);
            if (!sname.empty()) cfg.scenario = *parse_scenario(sname);
        }
        if (!seeds.empty()) cfg.seeds = seeds;
        if (!out_dir.empty()) cfg.output_path = out_dir;
        cfg.validate();

        if (*dump) {
            write_config(out, cfg);
            return 0;
        }

        const auto res = run_experiment(cfg);
        out << res.summary.dump(2) << '\n';
        for (const auto& g : res.gates)
            err << (g.pass ? "PASS " : "FAIL ") << g.name << " (value " << g.value << ", threshold " << g.threshold
                << ")\n";
        return check && !res.passed() ? 1 : 0;
    } catch (const SpecError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace sienna
