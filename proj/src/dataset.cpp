#include "cks/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cks/io.hpp"
#include "cks/rng.hpp"

namespace cks {

namespace fs = std::filesystem;

std::string to_string(Label label) {
    switch (label) {
        case Label::Positive: return "positive";
        case Label::Negative: return "negative";
        default: return "excluded";
    }
}

std::string to_string(DurationClass dc) {
    return dc == DurationClass::FourMinute ? "4min" : "30s";
}

Label parse_label(const std::string& s, bool* recognised) {
    std::string t;
    for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (recognised) *recognised = true;
    if (t == "positive") return Label::Positive;
    if (t == "negative") return Label::Negative;
    if (t == "excluded") return Label::Excluded;
    if (recognised) *recognised = false;
    return Label::Excluded;
}

DurationClass parse_duration_class(const std::string& s) {
    if (s == "4min") return DurationClass::FourMinute;
    if (s == "30s") return DurationClass::ThirtySecond;
    throw DataError("unknown duration class: '" + s + "' (expected 4min or 30s)");
}

size_t expected_samples(DurationClass dc) {
    return dc == DurationClass::FourMinute ? 11520000u : 1440000u;
}

size_t DatasetManifest::count(Label label) const {
    return static_cast<size_t>(
        std::count_if(entries.begin(), entries.end(),
                      [&](const RecordingEntry& e) { return e.label == label; }));
}

// --- CSV -------------------------------------------------------------------

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::vector<std::string> split_tags(const std::string& s) {
    std::vector<std::string> tags;
    std::stringstream ss(s);
    std::string tag;
    while (std::getline(ss, tag, ';'))
        if (!tag.empty()) tags.push_back(tag);
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    return tags;
}

}  // namespace

DatasetManifest load_manifest_csv(const fs::path& path) {
    std::istringstream is(read_text_file(path));
    std::string line;
    if (!std::getline(is, line)) throw DataError("empty manifest: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv_split(line) != std::vector<std::string>{"path", "deployment", "label", "other_sources",
                                                    "duration_class"})
        throw DataError("bad manifest header: " + path.string());
    DatasetManifest m;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = csv_split(line);
        if (fields.size() != 5)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 5 fields");
        RecordingEntry e;
        e.path = fields[0];
        e.deployment = fields[1];
        bool recognised = true;
        e.label = parse_label(fields[2], &recognised);
        if (!recognised)
            std::cerr << "[manifest] " << path.string() << ":" << lineno << ": label '" << fields[2]
                      << "' not recognised; treating as excluded\n";
        e.other_sources = split_tags(fields[3]);
        e.duration_class = parse_duration_class(fields[4]);
        m.entries.push_back(std::move(e));
    }
    return m;
}

void save_manifest_csv(const fs::path& path, const DatasetManifest& manifest) {
    atomic_write(path, [&](std::ostream& os) {
        os << "path,deployment,label,other_sources,duration_class\n";
        for (const RecordingEntry& e : manifest.entries) {
            std::string tags;
            for (size_t i = 0; i < e.other_sources.size(); ++i) {
                if (i) tags += ';';
                tags += e.other_sources[i];
            }
            os << csv_escape(e.path) << ',' << csv_escape(e.deployment) << ',' << to_string(e.label)
               << ',' << csv_escape(tags) << ',' << to_string(e.duration_class) << '\n';
        }
    });
}

fs::path resolve_entry_path(const fs::path& manifest_path, const std::string& entry_path) {
    const fs::path p(entry_path);
    if (p.is_absolute()) return p;
    return manifest_path.parent_path() / p;
}

// --- balance / split ---------------------------------------------------------

DatasetManifest balance(const DatasetManifest& manifest, uint64_t rng_seed) {
    std::vector<size_t> pos, neg;
    for (size_t i = 0; i < manifest.entries.size(); ++i) {
        if (manifest.entries[i].label == Label::Positive) pos.push_back(i);
        if (manifest.entries[i].label == Label::Negative) neg.push_back(i);
    }
    if (pos.empty()) throw DataError("balance: no positive entries");
    if (neg.empty()) throw DataError("balance: no negative entries");

    const bool neg_majority = neg.size() >= pos.size();
    const std::vector<size_t>& majority = neg_majority ? neg : pos;
    const std::vector<size_t>& minority = neg_majority ? pos : neg;
    const size_t quota = minority.size();

    std::vector<char> keep(manifest.entries.size(), 0);
    for (size_t i : minority) keep[i] = 1;

    if (majority.size() == quota) {
        for (size_t i : majority) keep[i] = 1;
    } else {
        // Deployment-proportional quotas, largest remainder rounding.
        std::map<std::string, std::vector<size_t>> by_dep;
        for (size_t i : majority) by_dep[manifest.entries[i].deployment].push_back(i);
        const double total = static_cast<double>(majority.size());
        std::map<std::string, size_t> dep_quota;
        std::vector<std::pair<double, std::string>> rem;
        size_t assigned = 0;
        for (const auto& [dep, idx] : by_dep) {
            const double share = static_cast<double>(quota) * static_cast<double>(idx.size()) / total;
            const size_t b = std::min(static_cast<size_t>(share), idx.size());
            dep_quota[dep] = b;
            rem.emplace_back(share - static_cast<double>(b), dep);
            assigned += b;
        }
        std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        size_t r = 0;
        while (assigned < quota) {
            bool progressed = false;
            for (size_t i = 0; i < rem.size() && assigned < quota; ++i) {
                const std::string& dep = rem[(r + i) % rem.size()].second;
                if (dep_quota[dep] < by_dep[dep].size()) {
                    ++dep_quota[dep];
                    ++assigned;
                    progressed = true;
                }
            }
            if (!progressed) break;
            ++r;
        }

        Rng rng(rng_seed);
        for (auto& [dep, idx] : by_dep) {
            size_t want = dep_quota[dep];
            std::vector<size_t> tagged, untagged;
            for (size_t i : idx)
                (manifest.entries[i].other_sources.empty() ? untagged : tagged).push_back(i);
            // Tagged negatives carry the hard examples; sample them first.
            auto draw = [&](std::vector<size_t>& from, size_t k) {
                rng.shuffle(from);
                for (size_t j = 0; j < std::min(k, from.size()); ++j) keep[from[j]] = 1;
                return std::min(k, from.size());
            };
            const size_t from_tagged = draw(tagged, want);
            want -= from_tagged;
            if (want > 0) draw(untagged, want);
        }
    }

    DatasetManifest out;
    out.seed = manifest.seed;
    out.split_fraction = manifest.split_fraction;
    for (size_t i = 0; i < manifest.entries.size(); ++i)
        if (keep[i]) out.entries.push_back(manifest.entries[i]);
    return out;
}

std::pair<DatasetManifest, DatasetManifest> split(const DatasetManifest& manifest, double fraction,
                                                  uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ArgError("split: fraction must be in (0,1), got " + std::to_string(fraction));

    // Canonical order by path so assignment is independent of manifest order.
    std::vector<size_t> active;
    for (size_t i = 0; i < manifest.entries.size(); ++i)
        if (manifest.entries[i].label != Label::Excluded) active.push_back(i);
    std::sort(active.begin(), active.end(), [&](size_t a, size_t b) {
        return manifest.entries[a].path < manifest.entries[b].path;
    });

    std::vector<char> in_train(manifest.entries.size(), 0);
    Rng rng(seed);
    for (Label lbl : {Label::Positive, Label::Negative}) {
        std::vector<size_t> cls;
        for (size_t i : active)
            if (manifest.entries[i].label == lbl) cls.push_back(i);
        rng.shuffle(cls);
        const size_t n_train = static_cast<size_t>(
            std::llround(fraction * static_cast<double>(cls.size())));
        for (size_t j = 0; j < cls.size(); ++j) in_train[cls[j]] = j < n_train ? 1 : 0;
    }

    DatasetManifest train, val;
    train.seed = val.seed = seed;
    train.split_fraction = val.split_fraction = fraction;
    for (size_t i = 0; i < manifest.entries.size(); ++i) {
        if (manifest.entries[i].label == Label::Excluded) continue;
        (in_train[i] ? train : val).entries.push_back(manifest.entries[i]);
    }
    return {train, val};
}

void export_split_json(const fs::path& path, uint64_t seed, const DatasetManifest& train,
                       const DatasetManifest& val) {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["train"] = nlohmann::json::array();
    j["val"] = nlohmann::json::array();
    for (const auto& e : train.entries) j["train"].push_back(e.path);
    for (const auto& e : val.entries) j["val"].push_back(e.path);
    atomic_write(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

SplitRecord load_split_json(const fs::path& path) {
    const auto j = nlohmann::json::parse(read_text_file(path));
    SplitRecord rec;
    rec.seed = j.at("seed").get<uint64_t>();
    rec.train = j.at("train").get<std::vector<std::string>>();
    rec.val = j.at("val").get<std::vector<std::string>>();
    return rec;
}

}  // namespace cks
