#include "sienna/breath_sim.hpp"

#include "sienna/errors.hpp"
#include "sienna/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace sienna {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double unit_uniform(std::uint64_t seed, std::uint64_t stream)
{
    return static_cast<double>(mix_seed(seed, stream) >> 11) * 0x1.0p-53;
}

std::size_t sample_count(double t_start, double t_end, double rate)
{
    return static_cast<std::size_t>(std::llround((t_end - t_start) * rate));
}

// 0 -> 1 over the inhale, 1 -> 0 over the exhale.
double breath_shape(double u, double inhale_fraction, double decay)
{
    if (u < inhale_fraction) return 0.5 * (1.0 - std::cos(std::numbers::pi * u / inhale_fraction));
    const double v = (u - inhale_fraction) / (1.0 - inhale_fraction);
    const double floor_v = std::exp(-decay);
    return (std::exp(-decay * v) - floor_v) / (1.0 - floor_v);
}

struct DriftModel {
    double amp[3]{}, freq[3]{}, phase[3]{};

    DriftModel(const SubjectProfile& p)
    {
        // three slow tones whose combined standard deviation is drift_std
        const double a = p.drift_std * std::sqrt(2.0 / 3.0);
        for (int k = 0; k < 3; ++k) {
            amp[k] = a;
            freq[k] = 0.005 + 0.025 * unit_uniform(p.seed, 100 + k);
            phase[k] = two_pi * unit_uniform(p.seed, 200 + k);
        }
    }
    double operator()(double t) const
    {
        double v = 0;
        for (int k = 0; k < 3; ++k) v += amp[k] * std::sin(two_pi * freq[k] * t + phase[k]);
        return v;
    }
};

} // namespace

void SubjectProfile::validate() const
{
    require(resp_rate > 0 && heart_rate > 0, "profile: rates must be positive");
    require(resp_amp >= 0 && resp_amp <= 0.5, "profile: resp_amp must lie in [0, 0.5] cm");
    require(heart_amp >= 0 && heart_amp <= 0.05, "profile: heart_amp must lie in [0, 0.05] cm");
    require(inhale_fraction > 0 && inhale_fraction < 1, "profile: inhale_fraction must lie in (0, 1)");
    require(exhale_decay > 0, "profile: exhale_decay must be positive");
    require(depth_jitter >= 0 && depth_jitter < 1, "profile: depth_jitter must lie in [0, 1)");
    require(rate_jitter >= 0 && rate_jitter < 0.5, "profile: rate_jitter must lie in [0, 0.5)");
    require(drift_std >= 0, "profile: drift_std must be non-negative");
}

SubjectProfile random_profile(std::uint64_t seed)
{
    SubjectProfile p;
    p.seed = seed;
    auto u = [&](int k) { return unit_uniform(seed, static_cast<std::uint64_t>(k)); };
    p.resp_rate = 9.0 + 6.0 * u(1);
    p.resp_amp = 0.30 + 0.20 * u(2);
    p.inhale_fraction = 0.30 + 0.20 * u(3);
    p.exhale_decay = 2.0 + 3.0 * u(4);
    p.heart_rate = 45.0 + 15.0 * u(5);
    p.heart_amp = 0.02 + 0.03 * u(6);
    p.phase0 = two_pi * u(7);
    p.drift_std = 0.002 + 0.004 * u(8);
    p.depth_jitter = 0.03 + 0.07 * u(9);
    p.rate_jitter = 0.15 + 0.20 * u(10);
    return p;
}

double DisplacementSeries::value_at(double t) const
{
    require(!samples.empty(), "series: empty");
    const double pos = (t - t_start) * sample_rate;
    if (pos <= 0) return samples.front();
    const auto last = static_cast<double>(samples.size() - 1);
    if (pos >= last) return samples.back();
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) < 1e-9) return samples[static_cast<std::size_t>(nearest)];
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return samples[i] + frac * (samples[i + 1] - samples[i]);
}

DisplacementSeries synth_displacement(const SubjectProfile& profile, double t_start, double t_end, double rate)
{
    profile.validate();
    require(rate > 0, "synth_displacement: sample rate must be positive");
    require(t_end > t_start, "synth_displacement: t_end must exceed t_start");

    const DriftModel drift(profile);
    const double heart_phase = two_pi * unit_uniform(profile.seed, 300);
    const double period = 60.0 / profile.resp_rate;
    auto cycle_len = [&](std::int64_t id) {
        const auto key = static_cast<std::uint64_t>(id + (1ll << 40));
        return period * (1.0 + profile.rate_jitter * (2.0 * unit_uniform(profile.seed, 5000 + key) - 1.0));
    };

    DisplacementSeries out;
    out.sample_rate = rate;
    out.t_start = t_start;
    out.t_end = t_end;
    out.samples.resize(sample_count(t_start, t_end, rate));

    // Cycle 0 starts where the phase offset puts it relative to t = 0.
    std::int64_t cycle = 0;
    double begin = -profile.phase0 / two_pi * cycle_len(0);
    while (begin > t_start) begin -= cycle_len(--cycle);
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const double t = out.time_at(i);
        while (t >= begin + cycle_len(cycle)) begin += cycle_len(cycle++);
        const double u = (t - begin) / cycle_len(cycle);
        const auto cycle_id = static_cast<std::uint64_t>(cycle + (1ll << 40));
        const double depth = 1.0 - profile.depth_jitter * unit_uniform(profile.seed, 1000 + cycle_id);
        const double resp =
            profile.resp_amp * (2.0 * depth * breath_shape(u, profile.inhale_fraction, profile.exhale_decay) - 1.0);
        const double heart = profile.heart_amp * std::sin(two_pi * profile.heart_rate / 60.0 * t + heart_phase);
        out.samples[i] = resp + heart + drift(t);
    }
    return out;
}

RadarIQ radar_observe(const DisplacementSeries& displacement, const RadarParams& params)
{
    require(params.wavelength_m > 0, "radar_observe: wavelength must be positive");
    RadarIQ iq;
    iq.wavelength_m = params.wavelength_m;
    iq.theta0 = params.theta0;
    iq.a_i = params.a_i;
    iq.a_q = params.a_q;
    iq.phase_noise_std = params.phase_noise_std;
    iq.sample_rate = displacement.sample_rate;
    iq.t_start = displacement.t_start;
    iq.i_channel.resize(displacement.size());
    iq.q_channel.resize(displacement.size());

    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double k = 4.0 * std::numbers::pi / params.wavelength_m;
    for (std::size_t n = 0; n < displacement.size(); ++n) {
        const double dtheta = params.phase_noise_std > 0 ? params.phase_noise_std * noise(rng) : 0.0;
        const double phase = params.theta0 + k * displacement.samples[n] * 0.01 + dtheta;
        iq.i_channel[n] = params.a_i * std::cos(phase);
        iq.q_channel[n] = params.a_q * std::sin(phase);
    }
    return iq;
}

DisplacementSeries arctan_demodulate(const RadarIQ& iq)
{
    require(iq.a_i != 0 && iq.a_q != 0, "arctan_demodulate: channel gains must be non-zero");
    require(iq.i_channel.size() == iq.q_channel.size(), "arctan_demodulate: I and Q lengths differ");
    require(iq.wavelength_m > 0, "arctan_demodulate: wavelength must be positive");
    DisplacementSeries out;
    out.sample_rate = iq.sample_rate;
    out.t_start = iq.t_start;
    out.t_end = iq.t_start + static_cast<double>(iq.i_channel.size()) / iq.sample_rate;
    out.samples.resize(iq.i_channel.size());

    const double to_cm = iq.wavelength_m / (4.0 * std::numbers::pi) * 100.0;
    double prev = 0.0;
    for (std::size_t n = 0; n < iq.i_channel.size(); ++n) {
        const double wrapped = std::atan2(iq.a_i * iq.q_channel[n], iq.a_q * iq.i_channel[n]);
        double theta = wrapped;
        if (n > 0) {
            // nearest branch to the previous sample
            theta = wrapped + two_pi * std::round((prev - wrapped) / two_pi);
        }
        prev = theta;
        out.samples[n] = theta * to_cm;
    }
    return out;
}

LinearDemodResult linear_demodulate(std::span<const RadarIQ> channels)
{
    require(!channels.empty(), "linear_demodulate: no channels");
    const std::size_t n = channels.front().i_channel.size();
    require(n >= 2, "linear_demodulate: need at least two samples");
    LinearDemodResult out;
    out.mixtures.resize(static_cast<Eigen::Index>(channels.size()), static_cast<Eigen::Index>(n));
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& ch = channels[c];
        require(ch.i_channel.size() == n && ch.q_channel.size() == n,
                "linear_demodulate: channel " + std::to_string(c) + " has mismatched length");
        Eigen::Matrix<double, 2, Eigen::Dynamic> iq(2, static_cast<Eigen::Index>(n));
        for (std::size_t t = 0; t < n; ++t) {
            iq(0, static_cast<Eigen::Index>(t)) = ch.i_channel[t];
            iq(1, static_cast<Eigen::Index>(t)) = ch.q_channel[t];
        }
        iq.colwise() -= iq.rowwise().mean();
        const Eigen::Matrix2d cov = iq * iq.transpose() / static_cast<double>(n);
        require(cov.trace() > 1e-18, "linear_demodulate: channel " + std::to_string(c) + " has zero variance");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
        Eigen::Vector2d v = eig.eigenvectors().col(1);
        if (v(0) + v(1) < 0) v = -v;
        out.mixtures.row(static_cast<Eigen::Index>(c)) = v.transpose() * iq;
        out.leading_eigval.push_back(eig.eigenvalues()(1));
    }
    return out;
}

DisplacementSeries belt_observe(const DisplacementSeries& displacement, const BeltParams& params)
{
    require(params.sample_rate > 0, "belt_observe: sample rate must be positive");
    require(!displacement.samples.empty(), "belt_observe: empty displacement");
    DisplacementSeries out;
    out.sample_rate = params.sample_rate;
    out.t_start = displacement.t_start;
    out.t_end = displacement.t_end;
    out.samples.resize(sample_count(out.t_start, out.t_end, out.sample_rate));
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t n = 0; n < out.samples.size(); ++n) {
        const double v = params.gain * displacement.value_at(out.time_at(n));
        out.samples[n] = params.noise_std > 0 ? v + params.noise_std * noise(rng) : v;
    }
    return out;
}

SceneMixture mix_scene(const Scene& scene)
{
    const auto n_subjects = static_cast<Eigen::Index>(scene.subjects.size());
    require(n_subjects > 0, "mix_scene: no subjects");
    require(scene.mixing.cols() == n_subjects, "mix_scene: mixing matrix needs one column per subject");
    require(static_cast<Eigen::Index>(scene.noise_std.size()) == scene.mixing.rows(),
            "mix_scene: need one noise level per channel");
    require(scene.mixing.allFinite(), "mix_scene: mixing weights must be finite");

    SceneMixture out;
    out.sample_rate = scene.sample_rate;
    out.t_start = scene.t_start;
    for (Eigen::Index s = 0; s < n_subjects; ++s) {
        const auto x = synth_displacement(scene.subjects[static_cast<std::size_t>(s)], scene.t_start,
                                          scene.t_start + scene.duration, scene.sample_rate);
        if (s == 0) out.sources.resize(n_subjects, static_cast<Eigen::Index>(x.size()));
        out.sources.row(s) = Eigen::Map<const Eigen::RowVectorXd>(x.samples.data(), static_cast<Eigen::Index>(x.size()));
    }
    out.observations = scene.mixing * out.sources;
    std::mt19937_64 rng(mix_seed(scene.seed, 0x5CE7E));
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index c = 0; c < out.observations.rows(); ++c) {
        const double sd = scene.noise_std[static_cast<std::size_t>(c)];
        if (sd <= 0) continue;
        for (Eigen::Index t = 0; t < out.observations.cols(); ++t) out.observations(c, t) += sd * noise(rng);
    }
    return out;
}

void write_series_csv(std::ostream& os, const DisplacementSeries& series)
{
    os << "t_seconds,value\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < series.size(); ++i) os << series.time_at(i) << ',' << series.samples[i] << '\n';
}

DisplacementSeries read_series_csv(std::istream& is)
{
    std::string line;
    require(static_cast<bool>(std::getline(is, line)) && line == "t_seconds,value", "series csv: bad header");
    std::vector<double> times;
    DisplacementSeries out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        double t = 0, v = 0;
        char comma = 0;
        require(static_cast<bool>(row >> t >> comma >> v) && comma == ',', "series csv: malformed row '" + line + "'");
        times.push_back(t);
        out.samples.push_back(v);
    }
    require(times.size() >= 2, "series csv: need at least two rows");
    out.t_start = times.front();
    out.sample_rate = static_cast<double>(times.size() - 1) / (times.back() - times.front());
    out.t_end = out.t_start + static_cast<double>(times.size()) / out.sample_rate;
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b)
{
    require(a.size() == b.size() && a.size() >= 2, "pearson: need equal lengths >= 2");
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    require(saa > 0 && sbb > 0, "pearson: zero-variance input");
    return sab / std::sqrt(saa * sbb);
}

} // namespace sienna
