#include "sienna/jade.hpp"

#include "sienna/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace sienna {

WhiteningResult whiten(const Eigen::MatrixXd& x, Eigen::Index n_components)
{
    const Eigen::Index m = x.rows();
    const Eigen::Index t = x.cols();
    require(n_components >= 1, "whiten: need at least one component");
    require(m >= n_components, "whiten: more components requested than channels");
    require(t > m, "whiten: need more samples than channels (T > M)");
    require(x.allFinite(), "whiten: non-finite input");

    WhiteningResult out;
    out.mean = x.rowwise().mean();
    const Eigen::MatrixXd xc = x.colwise() - out.mean;
    const Eigen::MatrixXd cov = xc * xc.transpose() / static_cast<double>(t);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    require(es.info() == Eigen::Success, "whiten: covariance eigendecomposition failed");
    const Eigen::VectorXd& ev = es.eigenvalues(); // ascending
    const double top = ev(m - 1);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < m; ++i)
        if (ev(i) > 1e-12 * std::max(top, 1e-300) && ev(i) > 0) ++rank;
    if (top <= 0) rank = 0;
    if (rank < n_components)
        throw SpecError("whiten: effective rank " + std::to_string(rank) + " is below requested " +
                        std::to_string(n_components) + " components");

    out.retained_components = n_components;
    out.whitener.resize(n_components, m);
    out.eigenvalues.resize(n_components);
    for (Eigen::Index k = 0; k < n_components; ++k) {
        const Eigen::Index col = m - 1 - k;
        out.eigenvalues(k) = ev(col);
        out.whitener.row(k) = es.eigenvectors().col(col).transpose() / std::sqrt(ev(col));
    }
    out.whitened = (out.whitener * xc).transpose();
    return out;
}

namespace {

// Cumulant matrix Q(M) of whitened data z (K×T):
// E[(z'Mz) zz'] - tr(M) I - M - M'.
Eigen::MatrixXd cumulant_matrix(const Eigen::MatrixXd& z, const Eigen::MatrixXd& basis)
{
    const Eigen::Index k = z.rows();
    const double t = static_cast<double>(z.cols());
    const Eigen::RowVectorXd w = (z.array() * (basis * z).array()).colwise().sum();
    Eigen::MatrixXd q = (z.array().rowwise() * w.array()).matrix() * z.transpose() / t;
    q -= basis.trace() * Eigen::MatrixXd::Identity(k, k) + basis + basis.transpose();
    return q;
}

double offdiag_energy(const std::vector<Eigen::MatrixXd>& set)
{
    double acc = 0;
    for (const auto& c : set) acc += c.squaredNorm() - c.diagonal().squaredNorm();
    return acc;
}

} // namespace

SeparationResult jade_separate(const Eigen::MatrixXd& x, Eigen::Index n_sources, double tol, int max_sweeps)
{
    require(tol > 0, "jade_separate: tolerance must be positive");
    require(max_sweeps >= 1, "jade_separate: need at least one sweep");
    const auto wh = whiten(x, n_sources);
    const Eigen::Index k = n_sources;
    const Eigen::MatrixXd z = wh.whitened.transpose();

    // Orthonormal basis of symmetric K×K matrices.
    std::vector<Eigen::MatrixXd> basis;
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(k, k);
        e(i, i) = 1;
        basis.push_back(e);
        for (Eigen::Index j = i + 1; j < k; ++j) {
            Eigen::MatrixXd f = Eigen::MatrixXd::Zero(k, k);
            f(i, j) = f(j, i) = std::numbers::sqrt2 / 2;
            basis.push_back(f);
        }
    }
    const auto nb = static_cast<Eigen::Index>(basis.size());
    std::vector<Eigen::MatrixXd> q;
    q.reserve(basis.size());
    for (const auto& b : basis) q.push_back(cumulant_matrix(z, b));

    // The cumulant map as an nb×nb matrix in this basis; its eigenvectors give
    // the eigen-matrices, kept weighted by their eigenvalues.
    Eigen::MatrixXd gram(nb, nb);
    for (Eigen::Index a = 0; a < nb; ++a)
        for (Eigen::Index b = 0; b < nb; ++b)
            gram(a, b) = (basis[static_cast<std::size_t>(a)].array() * q[static_cast<std::size_t>(b)].array()).sum();
    gram = 0.5 * (gram + gram.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    std::vector<Eigen::MatrixXd> cm;
    for (Eigen::Index e = 0; e < nb; ++e) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index b = 0; b < nb; ++b) acc += es.eigenvectors()(b, e) * basis[static_cast<std::size_t>(b)];
        cm.push_back(es.eigenvalues()(e) * acc);
    }

    SeparationResult out;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(k, k);
    out.offdiag_history.push_back(offdiag_energy(cm));
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double largest = 0;
        for (Eigen::Index p = 0; p + 1 < k; ++p) {
            for (Eigen::Index r = p + 1; r < k; ++r) {
                double g11 = 0, g12 = 0, g22 = 0;
                for (const auto& c : cm) {
                    const double a = c(p, p) - c(r, r);
                    const double b = c(p, r) + c(r, p);
                    g11 += a * a;
                    g12 += a * b;
                    g22 += b * b;
                }
                const double ton = g11 - g22;
                const double toff = 2 * g12;
                const double theta = 0.5 * std::atan2(toff, ton + std::sqrt(ton * ton + toff * toff));
                largest = std::max(largest, std::abs(theta));
                if (std::abs(theta) <= tol) continue;
                const double cs = std::cos(theta), sn = std::sin(theta);
                Eigen::MatrixXd g = Eigen::MatrixXd::Identity(k, k);
                g(p, p) = cs;
                g(r, r) = cs;
                g(p, r) = -sn;
                g(r, p) = sn;
                v = v * g;
                for (auto& c : cm) c = g.transpose() * c * g;
            }
        }
        out.iterations = sweep + 1;
        out.offdiag_history.push_back(offdiag_energy(cm));
        if (largest < tol) {
            out.converged = true;
            break;
        }
    }
    if (k == 1) out.converged = true;

    out.rotation = v.transpose();
    out.demixer = out.rotation * wh.whitener;
    out.sources = out.demixer * x;
    return out;
}

SourceMatch match_sources(const Eigen::MatrixXd& candidates, std::span<const double> reference)
{
    require(static_cast<Eigen::Index>(reference.size()) == candidates.cols(),
            "match_sources: reference length differs from candidates");
    require(reference.size() >= 2, "match_sources: need at least two samples");
    const Eigen::Map<const Eigen::VectorXd> ref(reference.data(), static_cast<Eigen::Index>(reference.size()));
    const Eigen::VectorXd rc = ref.array() - ref.mean();
    require(rc.norm() > 0, "match_sources: zero-variance reference");

    SourceMatch best;
    bool found = false;
    for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
        const Eigen::RowVectorXd row = candidates.row(i);
        const Eigen::RowVectorXd c = row.array() - row.mean();
        if (c.norm() == 0) continue;
        const double rho = c.dot(rc.transpose()) / (c.norm() * rc.norm());
        if (!found || std::abs(rho) > best.correlation) {
            best.index = i;
            best.sign = rho < 0 ? -1 : 1;
            best.correlation = std::abs(rho);
            found = true;
        }
    }
    require(found, "match_sources: every candidate has zero variance");
    return best;
}

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& s)
{
    Eigen::MatrixXd out = s.colwise() - s.rowwise().mean();
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double sd = std::sqrt(out.row(i).squaredNorm() / static_cast<double>(out.cols()));
        require(sd > 0, "normalize_rows: zero-variance row " + std::to_string(i));
        out.row(i) /= sd;
    }
    return out;
}

std::vector<double> fir_lowpass(std::span<const double> x, double sample_rate, double cutoff_hz, int taps)
{
    require(sample_rate > 0 && cutoff_hz > 0, "fir_lowpass: rates must be positive");
    require(taps >= 1 && taps % 2 == 1, "fir_lowpass: tap count must be odd");
    std::vector<double> out(x.begin(), x.end());
    if (cutoff_hz >= sample_rate / 2 || x.empty()) return out;

    const int half = taps / 2;
    const double fc = cutoff_hz / sample_rate;
    std::vector<double> h(static_cast<std::size_t>(taps));
    double sum = 0;
    for (int i = 0; i < taps; ++i) {
        const int k = i - half;
        const double sinc = k == 0 ? 2 * fc : std::sin(2 * std::numbers::pi * fc * k) / (std::numbers::pi * k);
        const double win = 0.54 - 0.46 * std::cos(2 * std::numbers::pi * i / (taps - 1 > 0 ? taps - 1 : 1));
        h[static_cast<std::size_t>(i)] = sinc * win;
        sum += sinc * win;
    }
    for (double& c : h) c /= sum;

    const auto n = static_cast<long>(x.size());
    for (long t = 0; t < n; ++t) {
        double acc = 0;
        for (int i = 0; i < taps; ++i) {
            const long idx = std::clamp(t + i - half, 0L, n - 1);
            acc += h[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(idx)];
        }
        out[static_cast<std::size_t>(t)] = acc;
    }
    return out;
}

Eigen::MatrixXd fir_lowpass_rows(const Eigen::MatrixXd& x, double sample_rate, double cutoff_hz, int taps)
{
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Eigen::RowVectorXd row = x.row(i);
        const auto f = fir_lowpass(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                                   sample_rate, cutoff_hz, taps);
        out.row(i) = Eigen::Map<const Eigen::RowVectorXd>(f.data(), x.cols());
    }
    return out;
}

} // namespace sienna
