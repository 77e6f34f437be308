#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "cks/common.hpp"

namespace cks {

/// Little-endian binary writer over an ostream.
class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& os) : os_(os) {}

    void magic(const char tag[4]) { os_.write(tag, 4); }
    void u32(uint32_t v) { write_raw(&v, sizeof v); }
    void u64(uint64_t v) { write_raw(&v, sizeof v); }
    void f32(float v) { write_raw(&v, sizeof v); }
    void f32_span(const float* data, size_t n) { write_raw(data, n * sizeof(float)); }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        os_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

private:
    void write_raw(const void* p, size_t n) {
        os_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
    }
    std::ostream& os_;
};

/// Little-endian binary reader with bounds checking.
class BinaryReader {
public:
    explicit BinaryReader(std::istream& is, std::string name) : is_(is), name_(std::move(name)) {}

    void expect_magic(const char tag[4]) {
        char got[4] = {};
        read_raw(got, 4);
        if (std::memcmp(got, tag, 4) != 0)
            throw DataError(name_ + ": bad magic, expected '" + std::string(tag, 4) + "'");
    }
    uint32_t u32() { uint32_t v; read_raw(&v, sizeof v); return v; }
    uint64_t u64() { uint64_t v; read_raw(&v, sizeof v); return v; }
    float f32() { float v; read_raw(&v, sizeof v); return v; }
    void f32_span(float* data, size_t n) { read_raw(data, n * sizeof(float)); }
    std::string str() {
        const uint32_t n = u32();
        std::string s(n, '\0');
        read_raw(s.data(), n);
        return s;
    }

private:
    void read_raw(void* p, size_t n) {
        is_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!is_) throw DataError(name_ + ": truncated file");
    }
    std::istream& is_;
    std::string name_;
};

/// Writes via a temp file in the same directory, then renames into place, so a
/// failed stage never leaves a partial output behind.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& body);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace cks
