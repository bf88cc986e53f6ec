#ifndef RESPI_CANCEL_HPP
#define RESPI_CANCEL_HPP

#include "respi/types.hpp"

namespace respi {

enum class LmsAlgo { Lms, Nlms };

struct LmsConfig {
    int taps = 32;
    double mu = 0.5;
    LmsAlgo algo = LmsAlgo::Nlms;
    double eps = 1e-8;
    /// Verbatim single-tap recursion y = conj(w) * r, w += mu * s * conj(e).
    /// Kept for comparison; it does not descend |e|^2 and diverges in
    /// general, unlike the reference-regressor update used by default.
    bool paper_literal = false;

    void validate() const;
};

/// Sample-by-sample adaptive canceller state: complex tap vector, reference
/// delay line, and an update counter. The recursion is order-dependent, so a
/// filter instance must be driven sequentially by a single owner.
class LmsFilter {
public:
    explicit LmsFilter(const LmsConfig& cfg);

    /// One update: shifts r into the delay line, emits e = s - y with
    /// y = sum_m conj(w_m) r[n-m], then corrects the taps with the
    /// reference regressor (mu_eff = mu, or mu / (eps + ||delay||^2) for
    /// NLMS). Throws DivergenceError when a tap leaves the finite range.
    Complex step(Complex r_sample, Complex s_sample);

    const Eigen::VectorXcd& weights() const { return w_; }
    const Eigen::VectorXcd& delay_line() const { return delay_; }
    std::int64_t updates() const { return n_updates_; }

private:
    LmsConfig cfg_;
    Eigen::VectorXcd w_;
    Eigen::VectorXcd delay_;  // delay_[m] = r[n-m]
    std::int64_t n_updates_ = 0;
};

/// Runs the canceller across a full reference/surveillance pair and returns
/// the error series e[n]. The first taps-1 outputs use a zero-padded delay
/// line. Inputs must have equal lengths and sample rates.
ComplexSeries cancel(const ComplexSeries& reference, const ComplexSeries& surveillance,
                     const LmsConfig& cfg);

/// Direct-signal attenuation in dB: power of the surveillance tail over the
/// power of the error tail, where the tail is the last (1 - settle_fraction)
/// of samples. Returns +infinity when the error tail has zero power.
double dsa_suppression(const ComplexSeries& surveillance, const ComplexSeries& error,
                       double settle_fraction);

}  // namespace respi

#endif  // RESPI_CANCEL_HPP
