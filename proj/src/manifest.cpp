#include "ctmls/manifest.hpp"

#include <fstream>

#include "ctmls/errors.hpp"

namespace ctmls {

std::size_t DatasetManifest::count(const std::string& label) const {
    std::size_t n = 0;
    for (const auto& r : records)
        if (r.label == label) ++n;
    return n;
}

DatasetManifest load_manifest(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw DataError("cannot open manifest " + csv_path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("manifest " + csv_path.string() + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "path,label")
        throw DataError("manifest " + csv_path.string() + ": expected header 'path,label', got '" +
                        line + "'");
    const std::filesystem::path base = csv_path.parent_path();
    DatasetManifest m;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos)
            throw DataError("manifest line " + std::to_string(lineno) + ": missing comma");
        std::filesystem::path p = line.substr(0, comma);
        const std::string label = line.substr(comma + 1);
        if (label != kLabelNormal && label != kLabelCovid)
            throw DataError("manifest line " + std::to_string(lineno) + ": label '" + label +
                            "' is not one of {normal, covid}");
        if (p.is_relative()) p = base / p;
        if (!std::filesystem::exists(p))
            throw DataError("manifest line " + std::to_string(lineno) + ": file not found: " +
                            p.string());
        m.records.push_back({std::move(p), label});
    }
    return m;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& csv_path) {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw DataError("cannot write manifest " + csv_path.string());
    out << "path,label\n";
    for (const auto& r : manifest.records) {
        const std::string p = r.path.string();
        if (p.find(',') != std::string::npos || p.find('\n') != std::string::npos)
            throw DataError("manifest path contains a comma or newline: " + p);
        out << p << "," << r.label << "\n";
    }
}

}  // namespace ctmls
