#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace cks {

/// One second-order section, direct form II transposed, unity a0.
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0;
    double a1 = 0, a2 = 0;
};

/// Cascade of second-order sections with per-cascade gain.
struct SosFilter {
    std::vector<Biquad> sections;
    double gain = 1.0;

    /// Single forward pass, zero initial state.
    void apply(const float* in, float* out, size_t n) const;
    std::vector<float> apply(const std::vector<float>& in) const;

    /// Complex frequency response at f_hz for the given sample rate.
    std::complex<double> response(double f_hz, double sample_rate) const;
    double magnitude_db(double f_hz, double sample_rate) const;

    /// Expanded numerator/denominator polynomials (for oracle cross-checks).
    std::pair<std::vector<double>, std::vector<double>> transfer_function() const;
};

/// Butterworth bandpass of order 2*order_lp poles (order_lp is the lowpass
/// prototype order), via pole prewarping, LP->BP transform and the bilinear
/// transform. Edge frequencies land on the half-power points.
SosFilter butterworth_bandpass(int order_lp, double low_hz, double high_hz, double sample_rate);

// --- FFT -----------------------------------------------------------------

/// In-place iterative radix-2 complex FFT. n must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a);

/// Squared magnitudes of the first n/2+1 bins of the real-input FFT.
std::vector<double> power_spectrum(const float* x, size_t n);

// --- Resampler -----------------------------------------------------------

/// Polyphase windowed-sinc rational resampler.
struct Resampler {
    int up = 1;    // L
    int down = 1;  // M
    int taps_per_phase = 64;
    std::vector<double> prototype;  // length taps_per_phase * up

    static Resampler design(int in_rate, int out_rate, int taps_per_phase = 64,
                            double kaiser_beta = 7.0);
    std::vector<float> apply(const std::vector<float>& in) const;
};

double kaiser_i0(double x);

}  // namespace cks
