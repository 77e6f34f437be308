#include "cks/transient.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "cks/io.hpp"
#include "cks/rng.hpp"

namespace cks {

namespace fs = std::filesystem;

namespace {

double median_abs(const std::vector<float>& w) {
    std::vector<float> a(w.size());
    for (size_t i = 0; i < w.size(); ++i) a[i] = std::abs(w[i]);
    const size_t mid = a.size() / 2;
    std::nth_element(a.begin(), a.begin() + static_cast<long>(mid), a.end());
    double med = a[mid];
    if (a.size() % 2 == 0) {
        const auto lo = std::max_element(a.begin(), a.begin() + static_cast<long>(mid));
        med = 0.5 * (med + static_cast<double>(*lo));
    }
    return med;
}

float peak_in(const std::vector<float>& w, size_t lo, size_t hi) {
    float peak = 0.0f;
    for (size_t i = lo; i <= hi; ++i) peak = std::max(peak, std::abs(w[i]));
    return peak;
}

size_t argpeak_in(const std::vector<float>& w, size_t lo, size_t hi) {
    size_t best = lo;
    for (size_t i = lo; i <= hi; ++i)
        if (std::abs(w[i]) > std::abs(w[best])) best = i;
    return best;
}

}  // namespace

std::vector<TransientDetection> detect_transients(const AudioSegment& w, const DetectorConfig& cfg) {
    const size_t n = w.samples.size();
    if (n <= static_cast<size_t>(cfg.warmup_samples))
        throw ArgError("detect_transients: signal shorter than warmup");

    double noise = median_abs(w.samples);
    double signal = std::abs(static_cast<double>(w.samples[0]));
    const double thr_lin = std::pow(10.0, cfg.threshold_db / 20.0);
    bool detection = false;

    std::vector<TransientDetection> raw;
    size_t open_at = 0;
    for (size_t i = static_cast<size_t>(cfg.warmup_samples); i < n; ++i) {
        const double a_n = detection ? cfg.alpha_n1 : cfg.alpha_n2;
        const double x = std::abs(static_cast<double>(w.samples[i]));
        noise = a_n * x + (1.0 - a_n) * noise;
        signal = cfg.alpha_s * x + (1.0 - cfg.alpha_s) * signal;
        // Ratio comparison rather than log difference: same boundary, no log(0),
        // and exactly invariant under power-of-two amplitude scaling.
        const bool above = signal > 0.0 && noise > 0.0 && signal > noise * thr_lin;
        if (above && !detection) open_at = i;
        if (!above && detection) raw.push_back({open_at, i - 1, 0.0f});
        detection = above;
    }
    if (detection) raw.push_back({open_at, n - 1, 0.0f});

    // Merge fragments separated by less than 2 ms.
    const size_t merge_gap = static_cast<size_t>(std::lround(0.002 * w.sample_rate));
    std::vector<TransientDetection> merged;
    for (const TransientDetection& d : raw) {
        if (!merged.empty() && d.start_idx - merged.back().end_idx < merge_gap)
            merged.back().end_idx = d.end_idx;
        else
            merged.push_back(d);
    }
    for (TransientDetection& d : merged) d.peak_abs = peak_in(w.samples, d.start_idx, d.end_idx);
    return merged;
}

std::string to_string(ClipKind kind) {
    return kind == ClipKind::Transient ? "transient" : "random_noise";
}

ClipKind parse_clip_kind(const std::string& s) {
    if (s == "transient") return ClipKind::Transient;
    if (s == "random_noise") return ClipKind::RandomNoise;
    throw DataError("unknown clip kind: " + s);
}

bool valid_clip_length(size_t n) {
    for (int len : kClipLengths)
        if (n == static_cast<size_t>(len)) return true;
    return false;
}

std::vector<Clip> select_clips(const AudioSegment& w,
                               const std::vector<TransientDetection>& detections, size_t clip_len,
                               size_t max_transients, size_t n_random, uint64_t rng_seed,
                               const std::string& source_path, Label source_label) {
    if (!valid_clip_length(clip_len))
        throw ArgError("select_clips: clip length must be one of 512, 2048, 32768");
    const size_t n = w.samples.size();
    if (n < clip_len) throw DataError("select_clips: file shorter than clip length");

    Rng rng(rng_seed);
    std::vector<Clip> clips;

    std::vector<size_t> order(detections.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return detections[a].peak_abs > detections[b].peak_abs;
    });
    order.resize(std::min(order.size(), max_transients));

    for (size_t i : order) {
        const TransientDetection& d = detections[i];
        const size_t peak_idx = argpeak_in(w.samples, d.start_idx, d.end_idx);
        const size_t offset = static_cast<size_t>(rng.uniform_int(clip_len));
        size_t start = peak_idx >= offset ? peak_idx - offset : 0;
        start = std::min(start, n - clip_len);
        Clip c;
        c.samples.assign(w.samples.begin() + static_cast<long>(start),
                         w.samples.begin() + static_cast<long>(start + clip_len));
        c.source_path = source_path;
        c.source_label = source_label;
        c.kind = ClipKind::Transient;
        c.peak_offset = peak_idx - start;
        c.start_idx = start;
        clips.push_back(std::move(c));
    }

    const size_t max_attempts = 200 * std::max<size_t>(n_random, 1);
    size_t found = 0, attempts = 0;
    while (found < n_random && attempts < max_attempts) {
        ++attempts;
        const size_t start = static_cast<size_t>(rng.uniform_int(n - clip_len + 1));
        const size_t end = start + clip_len - 1;
        bool overlaps = false;
        for (const TransientDetection& d : detections)
            if (start <= d.end_idx && d.start_idx <= end) {
                overlaps = true;
                break;
            }
        if (overlaps) continue;
        Clip c;
        c.samples.assign(w.samples.begin() + static_cast<long>(start),
                         w.samples.begin() + static_cast<long>(start + clip_len));
        c.source_path = source_path;
        c.source_label = source_label;
        c.kind = ClipKind::RandomNoise;
        c.peak_offset = argpeak_in(w.samples, start, end) - start;
        c.start_idx = start;
        clips.push_back(std::move(c));
        ++found;
    }
    return clips;
}

void append_clips(const fs::path& dir, const std::vector<Clip>& clips,
                  std::vector<ClipIndexRow>& index) {
    fs::create_directories(dir);
    for (const Clip& c : clips) {
        std::ostringstream id;
        id << "clip_" << std::setw(6) << std::setfill('0') << index.size() << "_"
           << (c.kind == ClipKind::Transient ? "t" : "r");
        AudioSegment seg;
        seg.sample_rate = kTargetRate;
        seg.samples = c.samples;
        save_segment(dir / (id.str() + ".cks"), seg);
        index.push_back({id.str(), c.source_path, c.source_label, c.kind, c.start_idx});
    }
}

void save_clip_index(const fs::path& dir, const std::vector<ClipIndexRow>& index) {
    atomic_write(dir / "index.csv", [&](std::ostream& os) {
        os << "clip_id,source_path,source_label,kind,start_idx\n";
        for (const ClipIndexRow& r : index)
            os << r.clip_id << ',' << r.source_path << ',' << to_string(r.source_label) << ','
               << to_string(r.kind) << ',' << r.start_idx << '\n';
    });
}

std::vector<ClipIndexRow> load_clip_index(const fs::path& dir) {
    std::istringstream is(read_text_file(dir / "index.csv"));
    std::string line;
    if (!std::getline(is, line)) throw DataError("empty clip index in " + dir.string());
    std::vector<ClipIndexRow> rows;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id, src, lbl, kind, start;
        std::getline(ss, id, ',');
        std::getline(ss, src, ',');
        std::getline(ss, lbl, ',');
        std::getline(ss, kind, ',');
        std::getline(ss, start, ',');
        rows.push_back({id, src, parse_label(lbl), parse_clip_kind(kind),
                        static_cast<size_t>(std::stoull(start))});
    }
    return rows;
}

AudioSegment load_clip(const fs::path& dir, const std::string& clip_id) {
    return load_segment(dir / (clip_id + ".cks"));
}

}  // namespace cks
