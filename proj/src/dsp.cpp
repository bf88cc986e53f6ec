#include "respi/dsp.hpp"

#include <cmath>
#include <numbers>

namespace respi {

namespace {

constexpr int kStageTaps = 127;
constexpr int kMaxStageFactor = 5;

// Anti-alias filter for one decimation stage. Cutoff at 0.8x the stage output
// Nyquist; with 127 taps the Hamming transition band stays below the first
// alias fold for stage factors up to 5.
Eigen::VectorXd stage_filter(int factor) {
    const double cutoff = 0.8 * (0.5 / factor);
    return design_lowpass_fir(kStageTaps, cutoff);
}

// Filters at the decimated output points only (polyphase evaluation), with
// group-delay compensation so the output is phase-aligned with the input.
ComplexSeries decimate_stage(const ComplexSeries& in, int factor, const Eigen::VectorXd& h) {
    const Eigen::Index n_in = in.samples.size();
    const Eigen::Index n_out = n_in / factor;
    const Eigen::Index half = (h.size() - 1) / 2;

    ComplexSeries out;
    out.sample_rate_hz = in.sample_rate_hz / factor;
    out.samples.resize(n_out);
    for (Eigen::Index k = 0; k < n_out; ++k) {
        const Eigen::Index center = k * static_cast<Eigen::Index>(factor);
        Eigen::Index lo = center - half;
        Eigen::Index t0 = 0;
        if (lo < 0) {
            t0 = -lo;
            lo = 0;
        }
        const Eigen::Index len = std::min<Eigen::Index>(h.size() - t0, n_in - lo);
        out.samples[k] = len > 0
            ? Complex(h.segment(t0, len).transpose() * in.samples.segment(lo, len))
            : Complex(0.0, 0.0);
    }
    return out;
}

}  // namespace

Eigen::VectorXd design_lowpass_fir(int taps, double cutoff_norm) {
    if (taps < 1 || taps % 2 == 0) throw std::invalid_argument("fir taps must be odd and >= 1");
    if (!(cutoff_norm > 0.0 && cutoff_norm < 0.5))
        throw std::invalid_argument("fir cutoff must lie in (0, 0.5)");

    const double two_pi = 2.0 * std::numbers::pi;
    const int half = (taps - 1) / 2;
    Eigen::VectorXd h(taps);
    for (int n = 0; n < taps; ++n) {
        const int m = n - half;
        const double sinc = m == 0 ? 2.0 * cutoff_norm
                                   : std::sin(two_pi * cutoff_norm * m) / (std::numbers::pi * m);
        const double window = 0.54 - 0.46 * std::cos(two_pi * n / (taps - 1));
        h[n] = sinc * window;
    }
    h /= h.sum();  // unit DC gain
    return h;
}

ComplexSeries decimate(const ComplexSeries& series, int factor) {
    if (factor < 1) throw std::invalid_argument("decimate: factor must be >= 1");
    if (factor == 1) return series;
    if (series.samples.size() == 0)
        return ComplexSeries{{}, series.sample_rate_hz / factor};

    if (factor <= kMaxStageFactor)
        return decimate_stage(series, factor, stage_filter(factor));

    for (int d = kMaxStageFactor; d >= 2; --d) {
        if (factor % d == 0)
            return decimate(decimate_stage(series, d, stage_filter(d)), factor / d);
    }
    // Prime factor beyond the stage limit: one long filter sized so the
    // stopband still reaches the alias fold at -40 dB.
    const int taps = 2 * (27 * factor / 2) + 1;
    return decimate_stage(series, factor, design_lowpass_fir(taps, 0.8 * 0.5 / factor));
}

std::vector<Eigen::Matrix2Xd> segment(const ComplexSeries& series, Eigen::Index window_len,
                                      Eigen::Index stride) {
    if (window_len < 1) throw std::invalid_argument("segment: window_len must be >= 1");
    if (stride < 1) throw std::invalid_argument("segment: stride must be >= 1");

    const Eigen::Index n = series.samples.size();
    std::vector<Eigen::Matrix2Xd> windows;
    if (window_len > n) return windows;

    const Eigen::Index count = (n - window_len) / stride + 1;
    windows.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index k = 0; k < count; ++k) {
        Eigen::Matrix2Xd w(2, window_len);
        const auto block = series.samples.segment(k * stride, window_len);
        w.row(0) = block.real().transpose();
        w.row(1) = block.imag().transpose();
        windows.push_back(std::move(w));
    }
    return windows;
}

double mean_power(const Eigen::VectorXcd& x) {
    if (x.size() == 0) return 0.0;
    return x.squaredNorm() / static_cast<double>(x.size());
}

Eigen::VectorXd unwrap_phase(const Eigen::VectorXd& phase) {
    Eigen::VectorXd out(phase.size());
    if (phase.size() == 0) return out;
    out[0] = phase[0];
    double offset = 0.0;
    for (Eigen::Index i = 1; i < phase.size(); ++i) {
        double d = phase[i] - phase[i - 1];
        if (d > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
        else if (d < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
        out[i] = phase[i] + offset;
    }
    return out;
}

}  // namespace respi
