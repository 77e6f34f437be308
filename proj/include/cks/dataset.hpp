#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cks/common.hpp"

namespace cks {

enum class Label { Positive, Negative, Excluded };
enum class DurationClass { FourMinute, ThirtySecond };

std::string to_string(Label label);
std::string to_string(DurationClass dc);
/// Unrecognised label strings map to Excluded (the caller may log them).
Label parse_label(const std::string& s, bool* recognised = nullptr);
DurationClass parse_duration_class(const std::string& s);

/// Expected sample count after preparation (48 kHz).
size_t expected_samples(DurationClass dc);

struct RecordingEntry {
    std::string path;
    std::string deployment;
    Label label = Label::Excluded;
    std::vector<std::string> other_sources;  // sorted, unique tags
    DurationClass duration_class = DurationClass::FourMinute;

    bool operator==(const RecordingEntry&) const = default;
};

struct DatasetManifest {
    std::vector<RecordingEntry> entries;
    uint64_t seed = 0;
    double split_fraction = 0.8;

    size_t count(Label label) const;
};

/// CSV with header `path,deployment,label,other_sources,duration_class`;
/// other_sources is a semicolon-separated tag list.
DatasetManifest load_manifest_csv(const std::filesystem::path& path);
void save_manifest_csv(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Entry paths are stored relative to the manifest file.
std::filesystem::path resolve_entry_path(const std::filesystem::path& manifest_path,
                                         const std::string& entry_path);

/// Drops Excluded entries and subsamples the majority class to match the
/// minority count, per-deployment proportionally. Negatives tagged with other
/// impulsive sources are preferentially retained. Original entry order is kept.
DatasetManifest balance(const DatasetManifest& manifest, uint64_t rng_seed);

/// Deterministic stratified split. Assignment depends only on (seed, path),
/// not on manifest order. Excluded entries are dropped from both parts.
std::pair<DatasetManifest, DatasetManifest> split(const DatasetManifest& manifest, double fraction,
                                                  uint64_t seed);

/// Audit record: {"seed":..., "train":[...], "val":[...]}.
void export_split_json(const std::filesystem::path& path, uint64_t seed,
                       const DatasetManifest& train, const DatasetManifest& val);
struct SplitRecord {
    uint64_t seed = 0;
    std::vector<std::string> train;
    std::vector<std::string> val;
};
SplitRecord load_split_json(const std::filesystem::path& path);

}  // namespace cks
