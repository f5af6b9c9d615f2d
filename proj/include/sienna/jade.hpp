#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace sienna {

// Observations are M×T (one row per channel). The whitened matrix is stored
// T×K', i.e. one column per retained component.
struct WhiteningResult {
    Eigen::MatrixXd whitened;  // T×K'
    Eigen::MatrixXd whitener;  // K'×M
    Eigen::VectorXd mean;      // per-channel mean removed before whitening
    Eigen::VectorXd eigenvalues; // retained covariance eigenvalues, descending
    Eigen::Index retained_components = 0;
};

WhiteningResult whiten(const Eigen::MatrixXd& x, Eigen::Index n_components);

struct SeparationResult {
    Eigen::MatrixXd sources;  // N×T, sources = demixer * X
    Eigen::MatrixXd demixer;  // N×M, demixer = rotation * whitener
    Eigen::MatrixXd rotation; // N×N orthogonal
    int iterations = 0;       // full Jacobi sweeps performed
    bool converged = false;
    // Sum of squared off-diagonal entries over the cumulant set, before the
    // first sweep and after each sweep.
    std::vector<double> offdiag_history;
};

inline constexpr double jade_default_tol = 1e-8;
inline constexpr int jade_default_max_sweeps = 100;

SeparationResult jade_separate(const Eigen::MatrixXd& x, Eigen::Index n_sources,
                               double tol = jade_default_tol, int max_sweeps = jade_default_max_sweeps);

struct SourceMatch {
    Eigen::Index index = 0;
    int sign = 1;
    double correlation = 0; // after applying sign, so >= 0
};

// Picks the candidate row with the largest |Pearson correlation| against the
// reference. Zero-variance candidates are skipped.
SourceMatch match_sources(const Eigen::MatrixXd& candidates, std::span<const double> reference);

// Rows shifted to zero mean and scaled to unit variance.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& s);

// Linear-phase windowed-sinc low-pass (Hamming window), applied zero-phase
// with edge samples held. A cutoff at or above Nyquist returns the input.
std::vector<double> fir_lowpass(std::span<const double> x, double sample_rate, double cutoff_hz = 10.0,
                                int taps = 31);
Eigen::MatrixXd fir_lowpass_rows(const Eigen::MatrixXd& x, double sample_rate, double cutoff_hz = 10.0,
                                 int taps = 31);

} // namespace sienna
