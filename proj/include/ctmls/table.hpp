#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ctmls/features.hpp"

namespace ctmls {

// One extracted variant of one image.
struct TableRow {
    std::string image;
    SourceTag tag = SourceTag::original;
    std::vector<double> values;
    std::string label;
};

// Long-format feature table: three rows (original/thresholded/roi) per image.
struct FeatureTable {
    std::vector<std::string> feature_names;
    std::vector<TableRow> rows;

    std::vector<std::string> image_ids() const;   // unique, in first-seen order
    std::vector<std::string> image_labels() const;
};

// CSV schema: header `image,source_tag,<feature names...>,label`.
void save_feature_table(const FeatureTable& table, const std::filesystem::path& path);
FeatureTable load_feature_table(const std::filesystem::path& path);

}  // namespace ctmls
