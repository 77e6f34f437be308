#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cks/common.hpp"

namespace cks {

/// Mono sample vector plus sample rate; the unit flowing through preprocessing.
/// Samples are dimensionless amplitudes, nominal range [-1, 1].
struct AudioSegment {
    std::vector<float> samples;
    int sample_rate = 0;

    size_t size() const { return samples.size(); }
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// 1-20 kHz 6-pole Butterworth bandpass used to standardise recordings.
struct BandpassSpec {
    double low_hz = 1000.0;
    double high_hz = 20000.0;
    int poles = 6;
};

constexpr int kTargetRate = 48000;

// --- WAV ---------------------------------------------------------------

/// Reads channel 0 of a PCM WAV file (16/24-bit integer or 32-bit float) and
/// converts it to floating amplitude in [-1, 1].
AudioSegment load_first_channel(const std::filesystem::path& path);

/// Writes a mono 16-bit PCM WAV. Samples are clamped to [-1, 1] and rounded.
void save_wav16(const std::filesystem::path& path, const AudioSegment& seg);

// --- Raw segment format -------------------------------------------------
// Little-endian header {magic "CKS1", u32 rate, u64 len} + f32 samples.

void save_segment(const std::filesystem::path& path, const AudioSegment& seg);
AudioSegment load_segment(const std::filesystem::path& path);

/// Loads either format by extension (.wav -> WAV, anything else -> CKS1).
AudioSegment load_audio(const std::filesystem::path& path);

// --- Standardisation chain ----------------------------------------------

/// Subtracts the sample mean; |mean| of the result is below 1e-6 of full scale.
AudioSegment remove_dc(const AudioSegment& seg);

/// Polyphase rational resampler to 48 kHz (Kaiser windowed sinc, 64 taps per
/// phase). Inputs already at 48 kHz pass through untouched. Input rates below
/// 48 kHz are an error.
AudioSegment resample_to_48k(const AudioSegment& seg);

/// Applies the bandpass as three cascaded biquads (bilinear transform of the
/// analog Butterworth prototype); single forward pass, same length and rate.
AudioSegment bandpass(const AudioSegment& seg, const BandpassSpec& spec = {});

/// Full chain: DC removal, decimation to 48 kHz, 1-20 kHz bandpass.
AudioSegment prepare(const AudioSegment& seg, const BandpassSpec& spec = {});

}  // namespace cks
