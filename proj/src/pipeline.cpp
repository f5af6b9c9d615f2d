#include "sienna/pipeline.hpp"

#include "sienna/errors.hpp"
#include "sienna/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace sienna {

RsCodeSpec default_pairing_code()
{
    return make_rs_spec(10, 1023, 63);
}

Fingerprint fold_fingerprint(const BitString& raw, const RsCodeSpec& spec)
{
    const auto segments = segment_pad(raw, spec.codeword_bits());
    return Fingerprint{xor_fold(segments)};
}

namespace {

void check_window(double t_str, double t_end)
{
    require(t_end > t_str, "fingerprint window is empty (t_end <= t_str)");
}

DisplacementSeries row_series(const Eigen::MatrixXd& m, Eigen::Index row, double rate, double t_start)
{
    DisplacementSeries s;
    s.sample_rate = rate;
    s.t_start = t_start;
    s.samples.resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.cols(); ++i) s.samples[static_cast<std::size_t>(i)] = m(row, i);
    s.t_end = t_start + static_cast<double>(m.cols()) / rate;
    return s;
}

double skewness(const Eigen::RowVectorXd& r)
{
    const Eigen::RowVectorXd c = r.array() - r.mean();
    const double v = c.squaredNorm() / static_cast<double>(c.size());
    return (c.array().cube().sum() / static_cast<double>(c.size())) / std::pow(v, 1.5);
}

} // namespace

Fingerprint belt_fingerprint(const DisplacementSeries& belt, double t_str, double t_end, const PipelineConfig& cfg,
                             const RsCodeSpec& spec)
{
    check_window(t_str, t_end);
    const auto fp = extract(standardize(belt, cfg.nominal_std), t_str, t_end, cfg.bank);
    return fold_fingerprint(fp.bits, spec);
}

PrmsFingerprints prms_fingerprints(std::span<const RadarIQ> channels, std::size_t n_sources, double t_str,
                                   double t_end, const PipelineConfig& cfg, const RsCodeSpec& spec)
{
    check_window(t_str, t_end);
    require(!channels.empty(), "prms_fingerprints: no radar channels");
    require(n_sources >= 1 && n_sources <= channels.size(), "prms_fingerprints: need 1 <= sources <= channels");
    const auto len = static_cast<Eigen::Index>(channels.front().i_channel.size());
    const double rate = channels.front().sample_rate;
    const double t0 = channels.front().t_start;

    Eigen::MatrixXd x(static_cast<Eigen::Index>(channels.size()), len);
    if (cfg.demodulation == Demodulation::linear) {
        x = linear_demodulate(channels).mixtures;
    } else {
        for (std::size_t c = 0; c < channels.size(); ++c) {
            require(static_cast<Eigen::Index>(channels[c].i_channel.size()) == len,
                    "prms_fingerprints: channel lengths differ");
            const auto d = arctan_demodulate(channels[c]);
            x.row(static_cast<Eigen::Index>(c)) =
                Eigen::Map<const Eigen::RowVectorXd>(d.samples.data(), len);
        }
    }
    x = fir_lowpass_rows(x, rate, cfg.lowpass_cutoff_hz, cfg.fir_taps);

    const auto sep = jade_separate(x, static_cast<Eigen::Index>(n_sources), cfg.jade_tol, cfg.jade_max_sweeps);
    PrmsFingerprints out;
    out.sources = normalize_rows(sep.sources);
    out.low_confidence = !sep.converged;
    out.converged = sep.converged;
    out.sweeps = sep.iterations;
    for (Eigen::Index s = 0; s < out.sources.rows(); ++s) {
        const double sk = skewness(out.sources.row(s));
        if (std::abs(sk) < 0.05) out.low_confidence = true;
        if (sk < 0) out.sources.row(s) *= -1.0;
        const auto series = row_series(out.sources, s, rate, t0);
        const auto fp = extract(standardize(series, cfg.nominal_std), t_str, t_end, cfg.bank);
        out.raw.push_back(fp.bits);
        out.fingerprints.push_back(fold_fingerprint(fp.bits, spec));
    }
    return out;
}

PairingScene make_pairing_scene(const ScenarioConfig& cfg, std::uint64_t seed)
{
    std::vector<SubjectProfile> subjects;
    for (std::size_t s = 0; s < cfg.subjects; ++s) subjects.push_back(random_profile(mix_seed(seed, 0x5B0 + s)));
    return make_pairing_scene(cfg, std::move(subjects), seed);
}

PairingScene make_pairing_scene(const ScenarioConfig& cfg, std::vector<SubjectProfile> subjects, std::uint64_t seed)
{
    require(!subjects.empty(), "pairing scene: need at least one subject");
    require(cfg.radar_channels >= subjects.size(), "pairing scene: need at least as many radar channels as subjects");
    require(cfg.duration_s > 0 && cfg.sample_rate > 0, "pairing scene: duration and rate must be positive");
    std::mt19937_64 rng(mix_seed(seed, 0x5CE));
    std::uniform_real_distribution<double> u(0.0, 1.0);

    const auto n = static_cast<Eigen::Index>(subjects.size());
    const auto m = static_cast<Eigen::Index>(cfg.radar_channels);
    Scene sc;
    sc.subjects = subjects;
    sc.mixing = Eigen::MatrixXd::Zero(m, n);
    for (Eigen::Index c = 0; c < m; ++c) {
        if (n == 1) {
            sc.mixing(c, 0) = 1.0;
            continue;
        }
        const Eigen::Index main = c % n;
        const double w = 0.5 + 0.3 * u(rng);
        sc.mixing(c, main) = w;
        Eigen::VectorXd rest(n - 1);
        for (Eigen::Index k = 0; k < n - 1; ++k) rest(k) = 0.2 + u(rng);
        rest *= (1.0 - w) / rest.sum();
        for (Eigen::Index j = 0, k = 0; j < n; ++j)
            if (j != main) sc.mixing(c, j) = rest(k++);
    }
    sc.noise_std.assign(cfg.radar_channels, cfg.channel_noise_cm);
    sc.t_start = 0;
    // one extra sample so the window end is a sample instant
    sc.duration = cfg.duration_s + 1.0 / cfg.sample_rate;
    sc.sample_rate = cfg.sample_rate;
    sc.seed = mix_seed(seed, 0x313);

    PairingScene out;
    out.subjects = subjects;
    out.mixing = sc.mixing;
    out.mixture = mix_scene(sc);
    out.t_str = 0;
    out.t_end = cfg.duration_s;
    for (Eigen::Index c = 0; c < m; ++c) {
        RadarParams rp;
        rp.theta0 = 2.0 * std::numbers::pi * u(rng);
        rp.phase_noise_std = cfg.phase_noise_rad;
        rp.seed = mix_seed(seed, 0x4AD + static_cast<std::uint64_t>(c));
        out.radar.push_back(radar_observe(row_series(out.mixture.observations, c, cfg.sample_rate, 0.0), rp));
    }
    const auto chest = synth_displacement(subjects[0], 0.0, sc.duration, cfg.belt_rate);
    BeltParams bp;
    bp.noise_std = cfg.belt_noise_cm;
    bp.sample_rate = cfg.belt_rate;
    bp.seed = mix_seed(seed, 0xBE1);
    out.belt = belt_observe(chest, bp);
    return out;
}

} // namespace sienna
