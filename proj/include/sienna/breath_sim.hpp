#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sienna {

// Generative model of one subject's chest displacement (cm).
//
// Respiration is a raised-cosine inhale lasting inhale_fraction of the period
// followed by an exponential-decay exhale back to the end-expiratory level.
// Each cycle's depth is scaled by (1 - depth_jitter * u), u ~ U[0,1) per cycle,
// so the end-expiratory level stays at -resp_amp and peaks never exceed +resp_amp.
// Each cycle's duration is the nominal period scaled by (1 + rate_jitter * (2u - 1)).
struct SubjectProfile {
    double resp_rate = 12.0;      // breaths/min
    double resp_amp = 0.45;       // cm
    double inhale_fraction = 0.4; // of each breath period
    double exhale_decay = 3.0;    // shape constant of the exhale
    double depth_jitter = 0.05;
    double rate_jitter = 0.10;
    double heart_rate = 55.0;     // beats/min
    double heart_amp = 0.03;      // cm
    double phase0 = 0.0;          // radians
    double drift_std = 0.005;     // cm
    std::uint64_t seed = 1;

    void validate() const;
};

// Subject drawn from the synthetic population used by the experiments.
SubjectProfile random_profile(std::uint64_t seed);

struct DisplacementSeries {
    std::vector<double> samples;
    double sample_rate = 10.0; // Hz
    double t_start = 0.0;
    double t_end = 0.0;

    std::size_t size() const { return samples.size(); }
    double time_at(std::size_t i) const { return t_start + static_cast<double>(i) / sample_rate; }
    double last_time() const { return time_at(samples.size() - 1); }
    // Linear interpolation; t is clamped to the sampled range.
    double value_at(double t) const;
};

DisplacementSeries synth_displacement(const SubjectProfile& profile, double t_start, double t_end, double rate);

struct RadarParams {
    double wavelength_m = 0.0107; // 28 GHz
    double theta0 = 0.3;
    double a_i = 1.0;
    double a_q = 1.0;
    double phase_noise_std = 0.0; // radians
    std::uint64_t seed = 1;
};

struct RadarIQ {
    std::vector<double> i_channel;
    std::vector<double> q_channel;
    double wavelength_m = 0.0107;
    double theta0 = 0.0;
    double a_i = 1.0;
    double a_q = 1.0;
    double phase_noise_std = 0.0;
    double sample_rate = 10.0;
    double t_start = 0.0;
};

// B_I = A_I cos(theta0 + 4 pi x / lambda + dtheta), B_Q = A_Q sin(...), x converted from cm.
RadarIQ radar_observe(const DisplacementSeries& displacement, const RadarParams& params);

// Unwrapped arctangent phase converted back to cm (includes the theta0 offset).
DisplacementSeries arctan_demodulate(const RadarIQ& iq);

struct LinearDemodResult {
    Eigen::MatrixXd mixtures;           // one row per radar channel
    std::vector<double> leading_eigval; // variance of each output row
};

// Per channel: project the mean-centred (I, Q) samples onto the principal
// eigenvector of their 2x2 covariance.
LinearDemodResult linear_demodulate(std::span<const RadarIQ> channels);

struct BeltParams {
    double gain = 1.0;
    double noise_std = 0.0; // in belt output units
    double sample_rate = 100.0;
    std::uint64_t seed = 1;
};

DisplacementSeries belt_observe(const DisplacementSeries& displacement, const BeltParams& params);

struct Scene {
    std::vector<SubjectProfile> subjects;
    Eigen::MatrixXd mixing;         // channels x subjects
    std::vector<double> noise_std;  // per channel, cm
    double t_start = 0.0;
    double duration = 60.0;         // seconds
    double sample_rate = 10.0;
    std::uint64_t seed = 1;
};

struct SceneMixture {
    Eigen::MatrixXd observations; // X, channels x samples
    Eigen::MatrixXd sources;      // S, subjects x samples
    double sample_rate = 10.0;
    double t_start = 0.0;
};

SceneMixture mix_scene(const Scene& scene);

// CSV with header "t_seconds,value".
void write_series_csv(std::ostream& os, const DisplacementSeries& series);
DisplacementSeries read_series_csv(std::istream& is);

// Pearson correlation of equal-length sequences.
double pearson(std::span<const double> a, std::span<const double> b);

} // namespace sienna
