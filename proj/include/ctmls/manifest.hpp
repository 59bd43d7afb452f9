#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ctmls {

inline constexpr const char* kLabelNormal = "normal";
inline constexpr const char* kLabelCovid = "covid";

struct ManifestRecord {
    std::filesystem::path path;
    std::string label;  // "normal" or "covid"
};

struct DatasetManifest {
    std::vector<ManifestRecord> records;

    std::size_t count(const std::string& label) const;
};

// CSV with header `path,label`; labels must be exactly normal/covid and every
// path must exist. Relative paths resolve against the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& csv_path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& csv_path);

}  // namespace ctmls
