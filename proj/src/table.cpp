#include "ctmls/table.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ctmls/errors.hpp"

namespace ctmls {

std::vector<std::string> FeatureTable::image_ids() const {
    std::vector<std::string> ids;
    std::unordered_map<std::string, bool> seen;
    for (const TableRow& r : rows) {
        if (!seen.contains(r.image)) {
            seen[r.image] = true;
            ids.push_back(r.image);
        }
    }
    return ids;
}

std::vector<std::string> FeatureTable::image_labels() const {
    std::vector<std::string> labels;
    std::unordered_map<std::string, bool> seen;
    for (const TableRow& r : rows) {
        if (!seen.contains(r.image)) {
            seen[r.image] = true;
            labels.push_back(r.label);
        }
    }
    return labels;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void save_feature_table(const FeatureTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << "image,source_tag";
    for (const std::string& n : table.feature_names) out << "," << n;
    out << ",label\n";
    char buf[32];
    for (const TableRow& r : table.rows) {
        if (r.values.size() != table.feature_names.size())
            throw DataError("row for " + r.image + " has " + std::to_string(r.values.size()) +
                            " values, expected " + std::to_string(table.feature_names.size()));
        if (r.image.find(',') != std::string::npos)
            throw DataError("image id contains a comma: " + r.image);
        out << r.image << "," << to_string(r.tag);
        for (double v : r.values) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << "," << buf;
        }
        out << "," << r.label << "\n";
    }
}

FeatureTable load_feature_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("feature table " + path.string() + " is empty");
    std::vector<std::string> header = split_csv(line);
    if (header.size() < 4 || header.front() != "image" || header[1] != "source_tag")
        throw DataError("feature table " + path.string() +
                        ": header must start with 'image,source_tag'");
    if (header.back() != "label")
        throw DataError("feature table " + path.string() + ": missing 'label' column");

    FeatureTable table;
    table.feature_names.assign(header.begin() + 2, header.end() - 1);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv(line);
        if (cells.size() != header.size())
            throw DataError("feature table line " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
        TableRow row;
        row.image = cells[0];
        row.tag = source_tag_from_string(cells[1]);
        row.label = cells.back();
        if (row.label != "normal" && row.label != "covid")
            throw DataError("feature table line " + std::to_string(lineno) + ": bad label '" +
                            row.label + "'");
        row.values.reserve(table.feature_names.size());
        for (std::size_t i = 2; i + 1 < cells.size(); ++i) {
            try {
                row.values.push_back(std::stod(cells[i]));
            } catch (const std::exception&) {
                throw DataError("feature table line " + std::to_string(lineno) +
                                ": non-numeric cell '" + cells[i] + "'");
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace ctmls
