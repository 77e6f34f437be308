#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cks/audio.hpp"
#include "cks/dataset.hpp"

namespace cks {

/// Exponential-smoothing impulsive noise detector parameters.
struct DetectorConfig {
    double alpha_n1 = 1e-5;   // noise smoothing while a detection is active
    double alpha_n2 = 1e-6;   // noise smoothing outside detections
    double alpha_s = 1e-2;    // signal smoothing
    double threshold_db = 6.0;
    int warmup_samples = 256;
};

struct TransientDetection {
    size_t start_idx = 0;
    size_t end_idx = 0;  // inclusive
    float peak_abs = 0.0f;

    bool operator==(const TransientDetection&) const = default;
};

/// Runs the impulsive noise detector over a bandpassed 48 kHz signal.
///
/// Two exponentially smoothed level trackers follow the rectified signal: a
/// fast one (alpha_s) and a slow noise floor whose constant depends on whether
/// a detection is currently active. A detection opens when the
/// signal-to-noise ratio exceeds threshold_db and closes when it drops back.
/// Intervals closer than 2 ms are merged so one click is not shredded into
/// fragments by single below-threshold samples. A zero level on either
/// tracker counts as SNR = -inf, so all-zero input yields no detections.
std::vector<TransientDetection> detect_transients(const AudioSegment& w,
                                                  const DetectorConfig& cfg = {});

enum class ClipKind { Transient, RandomNoise };

std::string to_string(ClipKind kind);
ClipKind parse_clip_kind(const std::string& s);

struct Clip {
    std::vector<float> samples;
    std::string source_path;
    Label source_label = Label::Excluded;
    ClipKind kind = ClipKind::Transient;
    size_t peak_offset = 0;  // index of the amplitude peak within the clip
    size_t start_idx = 0;    // clip start within the source recording
};

inline constexpr int kClipLengths[] = {512, 2048, 32768};
bool valid_clip_length(size_t n);

/// Builds the clip corpus for one recording: the top `max_transients`
/// detections by peak amplitude (peak placed at a seeded random offset inside
/// the window, clamped to bounds) plus `n_random` noise windows that overlap
/// no detection. May return fewer noise clips than requested when detections
/// crowd the file.
std::vector<Clip> select_clips(const AudioSegment& w,
                               const std::vector<TransientDetection>& detections, size_t clip_len,
                               size_t max_transients, size_t n_random, uint64_t rng_seed,
                               const std::string& source_path = "",
                               Label source_label = Label::Excluded);

// --- Corpus persistence ------------------------------------------------------
// Clips are stored as CKS1 segments next to an index CSV
// `clip_id,source_path,source_label,kind,start_idx`.

struct ClipIndexRow {
    std::string clip_id;
    std::string source_path;
    Label source_label = Label::Excluded;
    ClipKind kind = ClipKind::Transient;
    size_t start_idx = 0;
};

void append_clips(const std::filesystem::path& dir, const std::vector<Clip>& clips,
                  std::vector<ClipIndexRow>& index);
void save_clip_index(const std::filesystem::path& dir, const std::vector<ClipIndexRow>& index);
std::vector<ClipIndexRow> load_clip_index(const std::filesystem::path& dir);
AudioSegment load_clip(const std::filesystem::path& dir, const std::string& clip_id);

}  // namespace cks
