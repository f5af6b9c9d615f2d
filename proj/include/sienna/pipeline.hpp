#pragma once

#include "sienna/breath_sim.hpp"
#include "sienna/fingerprint.hpp"
#include "sienna/fuzzy_commit.hpp"
#include "sienna/jade.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sienna {

enum class Demodulation { arctangent, linear };

struct PipelineConfig {
    QuantizerBank bank = QuantizerBank::symmetric();
    // Both modalities are standardized to this deviation (cm) before quantization.
    double nominal_std = 0.35;
    double lowpass_cutoff_hz = 10.0;
    int fir_taps = 31;
    Demodulation demodulation = Demodulation::arctangent;
    double jade_tol = jade_default_tol;
    int jade_max_sweeps = jade_default_max_sweeps;
};

// GF(2^10), M = 1023, N = 63: t = 480 symbols, 630-bit sub-salts. A 60 s
// fingerprint (12020 bits) folds from two segments, so every codeword bit is masked.
RsCodeSpec default_pairing_code();

// segment_pad to M*K bits, then xor_fold.
Fingerprint fold_fingerprint(const BitString& raw, const RsCodeSpec& spec);

Fingerprint belt_fingerprint(const DisplacementSeries& belt, double t_str, double t_end, const PipelineConfig& cfg,
                             const RsCodeSpec& spec);

struct PrmsFingerprints {
    std::vector<Fingerprint> fingerprints; // one per recovered source
    std::vector<BitString> raw;            // unfolded extract() output per source
    Eigen::MatrixXd sources;               // unit-variance, polarity-fixed
    bool low_confidence = false;           // JADE did not converge or polarity is ambiguous
    bool converged = false;
    int sweeps = 0;
};

// Demodulate each radar channel, low-pass, JADE into n_sources components,
// rescale to unit variance, fix polarity (positive skewness), fingerprint each.
PrmsFingerprints prms_fingerprints(std::span<const RadarIQ> channels, std::size_t n_sources, double t_str,
                                   double t_end, const PipelineConfig& cfg, const RsCodeSpec& spec);

// Synthetic observation setup for pairing experiments.
struct ScenarioConfig {
    std::size_t subjects = 2;
    std::size_t radar_channels = 4;
    double duration_s = 60.0;
    double sample_rate = 10.0;
    double channel_noise_cm = 0.005;
    double phase_noise_rad = 0.02;
    double belt_noise_cm = 0.005;
    double belt_rate = 100.0;
};

struct PairingScene {
    std::vector<SubjectProfile> subjects;
    Eigen::MatrixXd mixing;        // channels x subjects
    SceneMixture mixture;          // effective displacement per radar channel
    std::vector<RadarIQ> radar;    // one per channel
    DisplacementSeries belt;       // worn by subject 0
    double t_str = 0;
    double t_end = 0;
};

// Subjects come from random_profile; the belt always sits on subject 0.
// Mixing rows sum to one with a dominant weight in [0.5, 0.8] on one subject.
PairingScene make_pairing_scene(const ScenarioConfig& cfg, std::uint64_t seed);
PairingScene make_pairing_scene(const ScenarioConfig& cfg, std::vector<SubjectProfile> subjects, std::uint64_t seed);

} // namespace sienna
