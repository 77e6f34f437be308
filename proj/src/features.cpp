#include "cks/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "cks/dsp.hpp"
#include "cks/io.hpp"

namespace cks {

namespace fs_ = std::filesystem;

namespace {

const std::vector<double>& hann512() {
    static const std::vector<double> w = [] {
        std::vector<double> v(kFftSize);
        for (int i = 0; i < kFftSize; ++i)
            v[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / kFftSize);
        return v;
    }();
    return w;
}

/// Hann-windowed power spectrum of one 512-sample frame; src may be shorter
/// than 512 (tail frames), the remainder is zero.
std::vector<double> frame_power(const float* src, size_t avail) {
    std::vector<std::complex<double>> a(kFftSize, 0.0);
    const auto& win = hann512();
    const size_t n = std::min<size_t>(avail, kFftSize);
    for (size_t i = 0; i < n; ++i) a[i] = win[i] * static_cast<double>(src[i]);
    fft_inplace(a);
    std::vector<double> p(kFftSize / 2 + 1);
    for (size_t i = 0; i < p.size(); ++i) p[i] = std::norm(a[i]);
    return p;
}

std::vector<double> smooth8(const std::vector<double>& s) {
    const int n = static_cast<int>(s.size());
    std::vector<double> out(s.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - 3);
        const int hi = std::min(n - 1, i + 4);
        double acc = 0.0;
        for (int j = lo; j <= hi; ++j) acc += s[j];
        out[i] = acc / (hi - lo + 1);
    }
    return out;
}

std::vector<double> band_restrict(const std::vector<double>& full) {
    std::vector<double> s(kProfileLen);
    for (int i = 0; i < kProfileLen; ++i) s[i] = full[kFirstBin + i];
    return s;
}

}  // namespace

double SpectralFrame::total() const {
    double acc = 0.0;
    for (double v : s) acc += v;
    return acc;
}

SpectralFrame spectral_frame(const float* window, size_t len) {
    if (len != 512 && len != 2048)
        throw ArgError("spectral_frame: window length must be 512 or 2048");
    std::vector<double> avg(kFftSize / 2 + 1, 0.0);
    size_t frames = 0;
    for (size_t start = 0; start + kFftSize <= len; start += kFftHop, ++frames) {
        const auto p = frame_power(window + start, kFftSize);
        for (size_t i = 0; i < avg.size(); ++i) avg[i] += p[i];
    }
    for (double& v : avg) v /= static_cast<double>(frames);

    SpectralFrame frame;
    frame.s = smooth8(band_restrict(avg));
    frame.f.resize(kProfileLen);
    for (int i = 0; i < kProfileLen; ++i) frame.f[i] = (kFirstBin + i) * kBinWidthHz;
    return frame;
}

double peak_frequency(const SpectralFrame& frame) {
    if (frame.is_zero()) return 0.0;
    const auto it = std::max_element(frame.s.begin(), frame.s.end());
    return frame.f[static_cast<size_t>(it - frame.s.begin())];
}

double mean_frequency(const SpectralFrame& frame) {
    const double total = frame.total();
    if (total <= 0.0) return 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < frame.s.size(); ++i) acc += frame.s[i] * frame.f[i];
    return acc / total;
}

double energy_sum(const SpectralFrame& frame, double f1_hz, double f2_hz) {
    double acc = 0.0;
    for (size_t i = 0; i < frame.s.size(); ++i)
        if (frame.f[i] >= f1_hz && frame.f[i] < f2_hz) acc += frame.s[i];
    return acc;
}

double spectral_width(const SpectralFrame& frame) {
    if (frame.is_zero()) return 0.0;
    const int n = static_cast<int>(frame.s.size());
    const int peak = static_cast<int>(
        std::max_element(frame.s.begin(), frame.s.end()) - frame.s.begin());
    const double thr = frame.s[peak] * std::pow(10.0, -8.0 / 10.0);

    auto scan = [&](int step) {
        int furthest = peak;
        int below_run = 0;
        for (int i = peak + step; i >= 0 && i < n; i += step) {
            if (frame.s[i] >= thr) {
                furthest = i;
                below_run = 0;
            } else if (++below_run > 3) {
                break;
            }
        }
        return furthest;
    };
    const int hi = scan(+1);
    const int lo = scan(-1);
    return frame.f[hi] - frame.f[lo];
}

double rms_band(const float* window, size_t len, double f1_hz, double f2_hz, int sample_rate) {
    if (len != 512 && len != 2048) throw ArgError("rms_band: window length must be 512 or 2048");
    double acc = 0.0;
    if (f1_hz == 1000.0 && f2_hz == 20000.0) {
        for (size_t i = 0; i < len; ++i) acc += static_cast<double>(window[i]) * window[i];
    } else {
        const SosFilter f = butterworth_bandpass(2, f1_hz, f2_hz, sample_rate);
        std::vector<float> y(len);
        f.apply(window, y.data(), len);
        for (size_t i = 0; i < len; ++i) acc += static_cast<double>(y[i]) * y[i];
    }
    return std::sqrt(acc / static_cast<double>(len));
}

std::vector<float> spectral_profile(const float* window512) {
    const auto frame = spectral_frame(window512, 512);
    std::vector<float> out(kProfileLen);
    for (int i = 0; i < kProfileLen; ++i) out[i] = static_cast<float>(frame.s[i]);
    return out;
}

std::vector<float> spectrogram(const float* window32768) {
    // 128 frames x 200 band bins, power values.
    std::vector<double> img(static_cast<size_t>(kSpectrogramSize) * kProfileLen);
    for (int t = 0; t < kSpectrogramSize; ++t) {
        const size_t start = static_cast<size_t>(t) * kFftHop;
        const size_t avail = start < kSpectrogramWindow ? kSpectrogramWindow - start : 0;
        const auto p = frame_power(window32768 + start, avail);
        const auto band = band_restrict(p);
        for (int i = 0; i < kProfileLen; ++i)
            img[static_cast<size_t>(i) * kSpectrogramSize + t] = band[i];
    }

    // Bilinear resize 200x128 -> 128x128 (half-pixel centres; time axis is identity).
    std::vector<double> resized(static_cast<size_t>(kSpectrogramSize) * kSpectrogramSize);
    const double scale = static_cast<double>(kProfileLen) / kSpectrogramSize;
    for (int r = 0; r < kSpectrogramSize; ++r) {
        const double src = (r + 0.5) * scale - 0.5;
        const int r0 = std::clamp(static_cast<int>(std::floor(src)), 0, kProfileLen - 1);
        const int r1 = std::min(r0 + 1, kProfileLen - 1);
        const double frac = std::clamp(src - r0, 0.0, 1.0);
        for (int t = 0; t < kSpectrogramSize; ++t) {
            const double a = img[static_cast<size_t>(r0) * kSpectrogramSize + t];
            const double b = img[static_cast<size_t>(r1) * kSpectrogramSize + t];
            resized[static_cast<size_t>(r) * kSpectrogramSize + t] = a + (b - a) * frac;
        }
    }

    // Log scale, then per-image min-max normalisation.
    double lo = 1e300, hi = -1e300;
    for (double& v : resized) {
        v = std::log(v + 1e-12);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<float> out(resized.size(), 0.0f);
    if (hi - lo > 1e-12) {
        const double inv = 1.0 / (hi - lo);
        for (size_t i = 0; i < resized.size(); ++i)
            out[i] = static_cast<float>((resized[i] - lo) * inv);
    }
    return out;
}

// --- combos ---------------------------------------------------------------------

std::string to_string(Combo combo) {
    switch (combo) {
        case Combo::Rms1: return "rms1";
        case Combo::Rms3: return "rms3";
        case Combo::Rms5: return "rms5";
        case Combo::Spectral4: return "spec4";
        default: return "spec7";
    }
}

Combo parse_combo(const std::string& s) {
    if (s == "rms1") return Combo::Rms1;
    if (s == "rms3") return Combo::Rms3;
    if (s == "rms5") return Combo::Rms5;
    if (s == "spec4") return Combo::Spectral4;
    if (s == "spec7") return Combo::Spectral7;
    throw ArgError("unknown feature combo: " + s +
                   " (expected rms1|rms3|rms5|spec4|spec7)");
}

int combo_channels(Combo combo) {
    switch (combo) {
        case Combo::Rms1: return 1;
        case Combo::Rms3: return 3;
        case Combo::Rms5: return 5;
        case Combo::Spectral4: return 4;
        default: return 7;
    }
}

std::vector<std::pair<double, double>> combo_rms_bands(Combo combo) {
    switch (combo) {
        case Combo::Rms1:
        case Combo::Spectral4:
        case Combo::Spectral7: return {{1000, 20000}};
        case Combo::Rms3: return {{1000, 6000}, {6000, 12000}, {12000, 20000}};
        default: return {{1000, 2000}, {2000, 4000}, {4000, 8000}, {8000, 16000}, {16000, 20000}};
    }
}

size_t window_count(size_t len, size_t window) {
    if (window == kSpectrogramWindow) return (len + window - 1) / window;
    return len / window;
}

namespace {

/// Per-window channel values for the handcrafted combos.
void fill_window(const float* w, size_t len, Combo combo,
                 const std::vector<std::pair<double, double>>& bands,
                 const std::vector<SosFilter>& band_filters, float* out, size_t stride, size_t t) {
    size_t c = 0;
    for (size_t b = 0; b < bands.size(); ++b) {
        double acc = 0.0;
        if (band_filters[b].sections.empty()) {
            for (size_t i = 0; i < len; ++i) acc += static_cast<double>(w[i]) * w[i];
        } else {
            std::vector<float> y(len);
            band_filters[b].apply(w, y.data(), len);
            for (size_t i = 0; i < len; ++i) acc += static_cast<double>(y[i]) * y[i];
        }
        out[c++ * stride + t] = static_cast<float>(std::sqrt(acc / static_cast<double>(len)));
    }
    if (combo == Combo::Spectral4 || combo == Combo::Spectral7) {
        const SpectralFrame frame = spectral_frame(w, len);
        out[c++ * stride + t] = static_cast<float>(peak_frequency(frame));
        out[c++ * stride + t] = static_cast<float>(mean_frequency(frame));
        out[c++ * stride + t] = static_cast<float>(spectral_width(frame));
        if (combo == Combo::Spectral7) {
            out[c++ * stride + t] = static_cast<float>(energy_sum(frame, 1000, 4000));
            out[c++ * stride + t] = static_cast<float>(energy_sum(frame, 4000, 8000));
            out[c++ * stride + t] = static_cast<float>(energy_sum(frame, 8000, 16000));
        }
    }
}

std::vector<SosFilter> make_band_filters(const std::vector<std::pair<double, double>>& bands,
                                         int sample_rate) {
    std::vector<SosFilter> filters;
    for (const auto& [f1, f2] : bands) {
        if (f1 == 1000.0 && f2 == 20000.0)
            filters.emplace_back();  // pass-through
        else
            filters.push_back(butterworth_bandpass(2, f1, f2, sample_rate));
    }
    return filters;
}

}  // namespace

FeatureSequence extract_sequence(const AudioSegment& seg, Combo combo, int window) {
    if (window != 512 && window != 2048)
        throw ArgError("extract_sequence: window must be 512 or 2048");
    const size_t n = window_count(seg.samples.size(), static_cast<size_t>(window));
    if (n == 0) throw DataError("extract_sequence: recording shorter than one window");

    FeatureSequence out;
    out.m = combo_channels(combo);
    out.n = static_cast<int>(n);
    out.combo = to_string(combo);
    out.window = window;
    out.data.assign(static_cast<size_t>(out.m) * n, 0.0f);

    const auto bands = combo_rms_bands(combo);
    const auto filters = make_band_filters(bands, seg.sample_rate);
    for (size_t t = 0; t < n; ++t)
        fill_window(seg.samples.data() + t * window, static_cast<size_t>(window), combo, bands,
                    filters, out.data.data(), n, t);
    return out;
}

FeatureSequence extract_clip_features(const std::vector<std::vector<float>>& clips, Combo combo,
                                      int window) {
    if (clips.empty()) throw DataError("extract_clip_features: empty clip corpus");
    FeatureSequence out;
    out.m = combo_channels(combo);
    out.n = static_cast<int>(clips.size());
    out.combo = to_string(combo);
    out.window = window;
    out.data.assign(static_cast<size_t>(out.m) * clips.size(), 0.0f);
    const auto bands = combo_rms_bands(combo);
    const auto filters = make_band_filters(bands, kTargetRate);
    for (size_t t = 0; t < clips.size(); ++t) {
        if (clips[t].size() != static_cast<size_t>(window))
            throw DataError("extract_clip_features: clip length mismatch");
        fill_window(clips[t].data(), clips[t].size(), combo, bands, filters, out.data.data(),
                    clips.size(), t);
    }
    return out;
}

// --- FSQ1 ------------------------------------------------------------------------

void save_feature_sequence(const fs_::path& path, const FeatureSequence& fs) {
    atomic_write(path, [&](std::ostream& os) {
        BinaryWriter w(os);
        w.magic("FSQ1");
        w.u32(static_cast<uint32_t>(fs.m));
        w.u32(static_cast<uint32_t>(fs.n));
        w.f32_span(fs.data.data(), fs.data.size());
    });
    nlohmann::ordered_json j;
    j["combo"] = fs.combo;
    j["window"] = fs.window;
    j["source"] = fs.source;
    j["label"] = fs.label;
    j["deployment"] = fs.deployment;
    atomic_write(fs_::path(path.string() + ".json"),
                 [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

FeatureSequence load_feature_sequence(const fs_::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path.string());
    BinaryReader r(is, path.string());
    r.expect_magic("FSQ1");
    FeatureSequence fs;
    fs.m = static_cast<int>(r.u32());
    fs.n = static_cast<int>(r.u32());
    fs.data.resize(static_cast<size_t>(fs.m) * fs.n);
    r.f32_span(fs.data.data(), fs.data.size());

    const fs_::path side(path.string() + ".json");
    if (fs_::exists(side)) {
        const auto j = nlohmann::json::parse(read_text_file(side));
        fs.combo = j.value("combo", "");
        fs.window = j.value("window", 0);
        fs.source = j.value("source", "");
        fs.label = j.value("label", "");
        fs.deployment = j.value("deployment", "");
    }
    return fs;
}

}  // namespace cks
