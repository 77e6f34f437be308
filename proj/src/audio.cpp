#include "cks/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "cks/dsp.hpp"
#include "cks/io.hpp"

namespace cks {

namespace fs = std::filesystem;

namespace {

struct WavFormat {
    uint16_t code = 0;  // 1 = PCM, 3 = IEEE float (after resolving extensible)
    uint16_t channels = 0;
    uint32_t rate = 0;
    uint16_t bits = 0;
    uint16_t block_align = 0;
};

uint32_t rd_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (p[1] << 8) | (p[2] << 16) |
           (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t rd_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

}  // namespace

AudioSegment load_first_channel(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path.string());
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
        std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        throw DataError("corrupt WAV header: " + path.string());

    WavFormat fmt;
    const uint8_t* data = nullptr;
    size_t data_len = 0;
    size_t pos = 12;
    while (pos + 8 <= buf.size()) {
        const char* id = reinterpret_cast<const char*>(buf.data() + pos);
        const uint32_t chunk_len = rd_u32(buf.data() + pos + 4);
        const size_t body = pos + 8;
        if (body + chunk_len > buf.size()) throw DataError("corrupt WAV chunk: " + path.string());
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (chunk_len < 16) throw DataError("corrupt fmt chunk: " + path.string());
            fmt.code = rd_u16(buf.data() + body);
            fmt.channels = rd_u16(buf.data() + body + 2);
            fmt.rate = rd_u32(buf.data() + body + 4);
            fmt.block_align = rd_u16(buf.data() + body + 12);
            fmt.bits = rd_u16(buf.data() + body + 14);
            if (fmt.code == 0xFFFE) {  // WAVE_FORMAT_EXTENSIBLE
                if (chunk_len < 40) throw DataError("corrupt extensible fmt: " + path.string());
                fmt.code = rd_u16(buf.data() + body + 24);  // first bytes of the subformat GUID
            }
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = buf.data() + body;
            data_len = chunk_len;
        }
        pos = body + chunk_len + (chunk_len & 1);
    }
    if (fmt.channels == 0 || fmt.rate == 0) throw DataError("missing fmt chunk: " + path.string());
    if (data == nullptr || data_len == 0) throw DataError("empty or missing data chunk: " + path.string());

    const bool pcm16 = fmt.code == 1 && fmt.bits == 16;
    const bool pcm24 = fmt.code == 1 && fmt.bits == 24;
    const bool f32 = fmt.code == 3 && fmt.bits == 32;
    if (!pcm16 && !pcm24 && !f32)
        throw DataError("unsupported WAV encoding (format " + std::to_string(fmt.code) + ", " +
                        std::to_string(fmt.bits) + " bits): " + path.string());

    const size_t bytes_per_sample = fmt.bits / 8;
    const size_t stride = fmt.block_align ? fmt.block_align : bytes_per_sample * fmt.channels;
    const size_t frames = data_len / stride;
    if (frames == 0) throw DataError("empty data chunk: " + path.string());

    AudioSegment seg;
    seg.sample_rate = static_cast<int>(fmt.rate);
    seg.samples.resize(frames);
    for (size_t i = 0; i < frames; ++i) {
        const uint8_t* p = data + i * stride;  // channel 0 sits first in each frame
        float v;
        if (pcm16) {
            const int16_t s = static_cast<int16_t>(rd_u16(p));
            v = static_cast<float>(s) / 32768.0f;
        } else if (pcm24) {
            int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
            if (s & 0x800000) s |= ~0xFFFFFF;
            v = static_cast<float>(s) / 8388608.0f;
        } else {
            float raw;
            std::memcpy(&raw, p, 4);
            v = raw;
        }
        seg.samples[i] = v;
    }
    return seg;
}

void save_wav16(const fs::path& path, const AudioSegment& seg) {
    const uint32_t n = static_cast<uint32_t>(seg.samples.size());
    atomic_write(path, [&](std::ostream& os) {
        BinaryWriter w(os);
        const uint32_t data_bytes = n * 2;
        w.magic("RIFF");
        w.u32(36 + data_bytes);
        w.magic("WAVE");
        w.magic("fmt ");
        w.u32(16);
        const uint16_t one = 1, channels = 1, bits = 16, block = 2;
        os.write(reinterpret_cast<const char*>(&one), 2);
        os.write(reinterpret_cast<const char*>(&channels), 2);
        w.u32(static_cast<uint32_t>(seg.sample_rate));
        w.u32(static_cast<uint32_t>(seg.sample_rate) * 2);
        os.write(reinterpret_cast<const char*>(&block), 2);
        os.write(reinterpret_cast<const char*>(&bits), 2);
        w.magic("data");
        w.u32(data_bytes);
        std::vector<int16_t> q(n);
        for (uint32_t i = 0; i < n; ++i) {
            const float x = std::clamp(seg.samples[i], -1.0f, 1.0f);
            q[i] = static_cast<int16_t>(std::clamp(std::lround(x * 32768.0f), -32768L, 32767L));
        }
        os.write(reinterpret_cast<const char*>(q.data()), data_bytes);
    });
}

void save_segment(const fs::path& path, const AudioSegment& seg) {
    atomic_write(path, [&](std::ostream& os) {
        BinaryWriter w(os);
        w.magic("CKS1");
        w.u32(static_cast<uint32_t>(seg.sample_rate));
        w.u64(seg.samples.size());
        w.f32_span(seg.samples.data(), seg.samples.size());
    });
}

AudioSegment load_segment(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path.string());
    BinaryReader r(is, path.string());
    r.expect_magic("CKS1");
    AudioSegment seg;
    seg.sample_rate = static_cast<int>(r.u32());
    const uint64_t len = r.u64();
    seg.samples.resize(len);
    r.f32_span(seg.samples.data(), len);
    if (seg.sample_rate <= 0 || len == 0) throw DataError("degenerate segment: " + path.string());
    return seg;
}

AudioSegment load_audio(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".wav" ? load_first_channel(path) : load_segment(path);
}

AudioSegment remove_dc(const AudioSegment& seg) {
    double sum = 0.0;
    for (float v : seg.samples) sum += v;
    const float mean = static_cast<float>(sum / static_cast<double>(seg.samples.size()));
    AudioSegment out;
    out.sample_rate = seg.sample_rate;
    out.samples.resize(seg.samples.size());
    for (size_t i = 0; i < seg.samples.size(); ++i) out.samples[i] = seg.samples[i] - mean;
    return out;
}

AudioSegment resample_to_48k(const AudioSegment& seg) {
    if (seg.sample_rate == kTargetRate) return seg;
    if (seg.sample_rate < kTargetRate)
        throw DataError("input rate below 48 kHz: " + std::to_string(seg.sample_rate));
    const Resampler r = Resampler::design(seg.sample_rate, kTargetRate);
    AudioSegment out;
    out.sample_rate = kTargetRate;
    out.samples = r.apply(seg.samples);
    return out;
}

AudioSegment bandpass(const AudioSegment& seg, const BandpassSpec& spec) {
    const SosFilter f = butterworth_bandpass(spec.poles / 2, spec.low_hz, spec.high_hz,
                                             static_cast<double>(seg.sample_rate));
    AudioSegment out;
    out.sample_rate = seg.sample_rate;
    out.samples = f.apply(seg.samples);
    return out;
}

AudioSegment prepare(const AudioSegment& seg, const BandpassSpec& spec) {
    if (seg.samples.empty()) throw DataError("prepare: empty segment");
    return bandpass(resample_to_48k(remove_dc(seg)), spec);
}

}  // namespace cks
