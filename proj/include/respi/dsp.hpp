#ifndef RESPI_DSP_HPP
#define RESPI_DSP_HPP

#include "respi/types.hpp"

#include <vector>

namespace respi {

/// Hamming-windowed sinc low-pass prototype. `cutoff_norm` is the cutoff as a
/// fraction of the sample rate (0 < cutoff_norm < 0.5); DC gain is 1.
Eigen::VectorXd design_lowpass_fir(int taps, double cutoff_norm);

/// Rate reduction by an integer factor with anti-alias filtering before
/// sample selection. Large factors are realized as a cascade of stages of
/// factor <= 5 so each 127-tap stage filter meets a 40 dB alias floor;
/// factor 1 is an exact identity.
ComplexSeries decimate(const ComplexSeries& series, int factor);

/// Slices a complex series into 2xW real windows (row 0 = real, row 1 = imag)
/// starting at multiples of `stride`; a trailing remainder shorter than
/// `window_len` is dropped.
std::vector<Eigen::Matrix2Xd> segment(const ComplexSeries& series, Eigen::Index window_len,
                                      Eigen::Index stride);

/// Mean |x|^2 over the vector; 0 for empty input.
double mean_power(const Eigen::VectorXcd& x);

/// Unwraps a phase sequence by correcting jumps larger than pi.
Eigen::VectorXd unwrap_phase(const Eigen::VectorXd& phase);

}  // namespace respi

#endif  // RESPI_DSP_HPP
