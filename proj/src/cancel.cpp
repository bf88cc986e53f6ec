#include "respi/cancel.hpp"

#include "respi/dsp.hpp"

#include <cmath>
#include <limits>

namespace respi {

namespace {
constexpr double kTapMagnitudeLimit = 1e6;
}

void LmsConfig::validate() const {
    if (taps < 1) throw std::invalid_argument("lms: taps must be >= 1");
    if (!(mu > 0.0)) throw std::invalid_argument("lms: mu must be > 0");
    if (!(eps > 0.0)) throw std::invalid_argument("lms: eps must be > 0");
}

LmsFilter::LmsFilter(const LmsConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.paper_literal) cfg_.taps = 1;
    w_ = Eigen::VectorXcd::Zero(cfg_.taps);
    delay_ = Eigen::VectorXcd::Zero(cfg_.taps);
}

Complex LmsFilter::step(Complex r_sample, Complex s_sample) {
    const int m = cfg_.taps;
    for (int i = m - 1; i > 0; --i) delay_[i] = delay_[i - 1];
    delay_[0] = r_sample;

    const Complex y = w_.dot(delay_);  // Eigen dot conjugates the left operand
    const Complex e = s_sample - y;

    if (cfg_.paper_literal) {
        w_[0] += cfg_.mu * s_sample * std::conj(e);
    } else {
        double mu_eff = cfg_.mu;
        if (cfg_.algo == LmsAlgo::Nlms) mu_eff = cfg_.mu / (cfg_.eps + delay_.squaredNorm());
        w_ += mu_eff * std::conj(e) * delay_;
    }
    ++n_updates_;

    for (int i = 0; i < m; ++i) {
        const Complex tap = w_[i];
        if (!std::isfinite(tap.real()) || !std::isfinite(tap.imag()) ||
            std::abs(tap) > kTapMagnitudeLimit)
            throw DivergenceError("lms diverged at step " + std::to_string(n_updates_ - 1),
                                  n_updates_ - 1);
    }
    return e;
}

ComplexSeries cancel(const ComplexSeries& reference, const ComplexSeries& surveillance,
                     const LmsConfig& cfg) {
    if (reference.samples.size() != surveillance.samples.size())
        throw std::invalid_argument("cancel: reference/surveillance length mismatch");
    if (reference.sample_rate_hz != surveillance.sample_rate_hz)
        throw std::invalid_argument("cancel: reference/surveillance rate mismatch");

    LmsFilter filter(cfg);
    ComplexSeries error;
    error.sample_rate_hz = surveillance.sample_rate_hz;
    error.samples.resize(surveillance.samples.size());
    for (Eigen::Index n = 0; n < surveillance.samples.size(); ++n)
        error.samples[n] = filter.step(reference.samples[n], surveillance.samples[n]);
    return error;
}

double dsa_suppression(const ComplexSeries& surveillance, const ComplexSeries& error,
                       double settle_fraction) {
    if (surveillance.samples.size() != error.samples.size())
        throw std::invalid_argument("dsa_suppression: length mismatch");
    if (!(settle_fraction >= 0.0 && settle_fraction < 1.0))
        throw std::invalid_argument("dsa_suppression: settle_fraction must lie in [0, 1)");

    const Eigen::Index n = surveillance.samples.size();
    const Eigen::Index start = static_cast<Eigen::Index>(
        std::llround(settle_fraction * static_cast<double>(n)));
    const Eigen::Index len = n - start;
    if (len <= 0) throw std::invalid_argument("dsa_suppression: empty tail");

    const double p_surv = mean_power(surveillance.samples.tail(len));
    const double p_err = mean_power(error.samples.tail(len));
    if (p_err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(p_surv / p_err);
}

}  // namespace respi
