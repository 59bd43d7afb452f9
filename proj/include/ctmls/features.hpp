#pragma once

#include <string>
#include <vector>

#include "ctmls/entropy.hpp"
#include "ctmls/image.hpp"

namespace ctmls {

enum class SourceTag { original, thresholded, roi };

std::string to_string(SourceTag tag);
SourceTag source_tag_from_string(const std::string& s);

// Named, ordered real-valued features for one image variant.
struct FeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;
    SourceTag tag = SourceTag::original;
};

struct FeatureConfig {
    int glcm_levels = 8;
    EntropyFeatureParams entropy;
};

// Real-valued band of a wavelet decomposition.
struct Band {
    int width = 0;
    int height = 0;
    std::vector<double> v;

    double at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
};

// Two-level orthonormal Haar decomposition. Band order:
// LL1, LH1 (horizontal detail), HL1 (vertical detail), HH1, then the same
// four at level 2 (computed from LL1). LL1 is retained as a band even though
// LL2 refines it. Dimensions must be multiples of 4.
std::array<Band, 8> haar_decompose2(const GrayImage& img);

// 40 statistics: per band, in order, mean / std / energy / entropy of the
// normalized squared-coefficient distribution / kurtosis.
std::vector<double> dwt_features(const GrayImage& img);

// Symmetrized, normalized co-occurrence matrix for one pixel offset.
std::vector<double> glcm_matrix(const GrayImage& img, int levels, int dx, int dy);

// The 18 descriptors of one normalized GLCM (levels x levels, row-major).
std::array<double, 18> glcm_descriptors(const std::vector<double>& m, int levels);

// 18 texture descriptors averaged over the four unit offsets
// (0, 45, 90, 135 degrees); intensities quantized to cfg.glcm_levels.
std::vector<double> glcm_features(const GrayImage& img, const FeatureConfig& cfg = {});

// Hu invariants 1-7 and Flusser's eighth, each signed-log scaled, plus the
// eccentricity of the second-moment ellipse. Moments are taken on the
// intensity-normalized image, so all nine are invariant to global intensity
// scaling; 1-8 are rotation invariant.
std::vector<double> hu_features(const GrayImage& img);

// Raw 74-dim vector: DWT(40) + GLCM(18) + HuM(9) + Entropy(7), fixed order.
FeatureVector extract_raw(const GrayImage& img, SourceTag tag, const FeatureConfig& cfg = {});

// Canonical names of the raw 74 features, in extraction order.
const std::vector<std::string>& raw_feature_names();

}  // namespace ctmls
