#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cks/audio.hpp"

namespace cks {

// 512-point Hann FFT at 48 kHz; bins 11..210 cover 1031.25-19687.5 Hz, which
// is the 200-bin [1,20] kHz convention used throughout.
inline constexpr int kFftSize = 512;
inline constexpr int kFftHop = 256;
inline constexpr double kBinWidthHz = 48000.0 / kFftSize;  // 93.75
inline constexpr int kProfileLen = 200;
inline constexpr int kFirstBin = 11;
inline constexpr int kSpectrogramWindow = 32768;
inline constexpr int kSpectrogramSize = 128;

/// Squared smoothed spectral vector over the 1-20 kHz band plus bin centre
/// frequencies. This is the `s` every spectral feature is defined on.
struct SpectralFrame {
    std::vector<double> s;  // kProfileLen non-negative values
    std::vector<double> f;  // strictly increasing bin centres (Hz)
    double bin_width = kBinWidthHz;

    double total() const;
    bool is_zero() const { return total() <= 0.0; }
};

/// Hann-windowed 512-point power spectrum, Welch-averaged with hop 256 for
/// 2048-sample windows, restricted to the 200-bin band and smoothed with an
/// 8-point moving average. Window length must be 512 or 2048.
SpectralFrame spectral_frame(const float* window, size_t len);

/// Bin-centre frequency of argmax(s); 0 for an all-zero frame.
double peak_frequency(const SpectralFrame& frame);
/// Spectral centroid sum(s*f)/sum(s); 0 for an all-zero frame.
double mean_frequency(const SpectralFrame& frame);
/// Sum of s over bins with f1 <= f < f2.
double energy_sum(const SpectralFrame& frame, double f1_hz, double f2_hz);
/// Width of the region around the peak staying above peak-8dB, allowing runs
/// of at most 3 consecutive below-threshold bins.
double spectral_width(const SpectralFrame& frame);

/// RMS of the window filtered to [f1, f2] with a 4-pole Butterworth bandpass
/// (the full 1-20 kHz band passes through unfiltered: recordings are already
/// bandpassed to it). Window length 512 or 2048.
double rms_band(const float* window, size_t len, double f1_hz, double f2_hz,
                int sample_rate = kTargetRate);

/// Length-200 squared smoothed spectral profile of a 512-sample window.
std::vector<float> spectral_profile(const float* window512);

/// 128x128 spectrogram image of a 32768-sample window: 128 hop-256 Hann FFTs
/// (the final frame is zero-padded), 1-20 kHz band, bilinear resize, then
/// log-scale and per-image min-max normalisation to [0,1]. Row 0 is the
/// lowest frequency; columns are time.
std::vector<float> spectrogram(const float* window32768);

// --- Feature combinations ----------------------------------------------------

enum class Combo { Rms1, Rms3, Rms5, Spectral4, Spectral7 };

std::string to_string(Combo combo);
Combo parse_combo(const std::string& s);
int combo_channels(Combo combo);
/// Band edges in Hz for the RMS channels of a combo.
std::vector<std::pair<double, double>> combo_rms_bands(Combo combo);

/// (m channels x n windows) feature matrix for one recording.
struct FeatureSequence {
    int m = 0;
    int n = 0;
    std::vector<float> data;  // row-major, data[c*n + t]
    std::string combo;        // combo name or "vae-<kind>-<latent>"
    int window = 0;
    std::string source;
    std::string label;
    std::string deployment;

    float& at(int c, int t) { return data[static_cast<size_t>(c) * n + t]; }
    float at(int c, int t) const { return data[static_cast<size_t>(c) * n + t]; }
};

/// Number of feature windows in a recording of `len` samples: trailing partial
/// windows are discarded, except for the 32768-sample spectrogram window where
/// the final partial window is kept and zero-padded.
size_t window_count(size_t len, size_t window);

/// Splits the recording into non-overlapping windows and computes the combo's
/// channels per window.
FeatureSequence extract_sequence(const AudioSegment& seg, Combo combo, int window);

/// Feature matrix of a clip corpus: one column per clip (each clip is exactly
/// one window long).
FeatureSequence extract_clip_features(const std::vector<std::vector<float>>& clips, Combo combo,
                                      int window);

// --- FSQ1 persistence ----------------------------------------------------------
// Little-endian {magic "FSQ1", u32 m, u32 n} + f32 row-major matrix, with a
// sidecar JSON `<path>.json` {combo, window, source, label, deployment}.

void save_feature_sequence(const std::filesystem::path& path, const FeatureSequence& fs);
FeatureSequence load_feature_sequence(const std::filesystem::path& path);

}  // namespace cks
