#include "sienna/fingerprint.hpp"

#include "sienna/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace sienna {

LevelCode qtz(double x, double q_plus, double q_minus)
{
    if (x >= q_plus) return LevelCode::above;
    if (x <= q_minus) return LevelCode::below;
    return LevelCode::inside;
}

void QuantizerBank::validate() const
{
    require(!levels.empty(), "quantizer bank: no branches");
    require(sample_interval > 0, "quantizer bank: sample interval must be positive");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        require(levels[i].first > levels[i].second,
                "quantizer bank: branch " + std::to_string(i) + " needs q_plus > q_minus");
        if (i > 0)
            require(levels[i].first > levels[i - 1].first && levels[i].second != levels[i - 1].second,
                    "quantizer bank: branches must be sorted with distinct thresholds");
    }
}

QuantizerBank QuantizerBank::symmetric(double step, std::size_t count, double sample_interval)
{
    require(step > 0 && count > 0, "quantizer bank: step and count must be positive");
    QuantizerBank bank;
    bank.sample_interval = sample_interval;
    for (std::size_t i = 1; i <= count; ++i) {
        const double q = step * static_cast<double>(i);
        bank.levels.emplace_back(q, -q);
    }
    bank.validate();
    return bank;
}

LevelCode FingerprintBits::code(std::size_t branch, std::size_t sample) const
{
    require(branch < branches && sample < samples, "fingerprint: code index out of range");
    const std::size_t pos = 2 * (branch * samples + sample);
    return static_cast<LevelCode>((bits[pos] << 1) | bits[pos + 1]);
}

std::size_t extract_sample_count(double t_str, double t_end, double sample_interval)
{
    require(sample_interval > 0, "extract: sample interval must be positive");
    require(t_end >= t_str, "extract: t_end before t_str");
    // small slack so 60 / 0.1 does not floor to 599
    return static_cast<std::size_t>(std::floor((t_end - t_str) / sample_interval + 1e-9)) + 1;
}

FingerprintBits extract(const DisplacementSeries& series, double t_str, double t_end, const QuantizerBank& bank)
{
    bank.validate();
    require(!series.samples.empty(), "extract: empty series");
    const double slack = 1e-9;
    require(t_str >= series.t_start - slack && t_end <= series.last_time() + slack,
            "extract: window [" + std::to_string(t_str) + ", " + std::to_string(t_end) +
                "] outside series [" + std::to_string(series.t_start) + ", " +
                std::to_string(series.last_time()) + "]");

    FingerprintBits fp;
    fp.branches = bank.count();
    fp.samples = extract_sample_count(t_str, t_end, bank.sample_interval);
    fp.t_str = t_str;
    fp.t_end = t_end;

    std::vector<double> values(fp.samples);
    for (std::size_t j = 0; j < fp.samples; ++j)
        values[j] = series.value_at(t_str + static_cast<double>(j) * bank.sample_interval);

    fp.bits = BitString(2 * fp.branches * fp.samples);
    std::size_t pos = 0;
    for (const auto& [q_plus, q_minus] : bank.levels) {
        for (double v : values) {
            const auto c = static_cast<std::uint8_t>(qtz(v, q_plus, q_minus));
            fp.bits.set(pos++, c & 0b10);
            fp.bits.set(pos++, c & 0b01);
        }
    }
    return fp;
}

std::vector<BitString> segment_pad(const BitString& bits, std::size_t target_len)
{
    require(target_len > 0, "segment_pad: target length must be positive");
    require(!bits.empty(), "segment_pad: empty input");
    std::vector<BitString> out;
    for (std::size_t pos = 0; pos < bits.size(); pos += target_len) {
        const std::size_t take = std::min(target_len, bits.size() - pos);
        BitString seg = bits.slice(pos, take);
        seg.append(BitString(target_len - take));
        out.push_back(std::move(seg));
    }
    return out;
}

double hamming_similarity(const BitString& a, const BitString& b)
{
    require(a.size() == b.size(), "hamming_similarity: length mismatch");
    require(!a.empty(), "hamming_similarity: empty input");
    return 1.0 - static_cast<double>(hamming_distance(a, b)) / static_cast<double>(a.size());
}

std::vector<double> standardize(std::span<const double> x, double target_std)
{
    require(x.size() >= 2, "standardize: need at least two samples");
    require(target_std > 0, "standardize: target deviation must be positive");
    double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    require(var > 0, "standardize: zero-variance input");
    const double scale = target_std / std::sqrt(var);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * scale;
    return out;
}

DisplacementSeries standardize(const DisplacementSeries& s, double target_std)
{
    DisplacementSeries out = s;
    out.samples = standardize(s.samples, target_std);
    return out;
}

void write_fingerprint_csv(std::ostream& os, const FingerprintBits& fp)
{
    os << "branch,sample_index,code\n";
    for (std::size_t b = 0; b < fp.branches; ++b)
        for (std::size_t j = 0; j < fp.samples; ++j) {
            const auto c = static_cast<std::uint8_t>(fp.code(b, j));
            os << b << ',' << j << ',' << ((c >> 1) & 1) << (c & 1) << '\n';
        }
}

} // namespace sienna
