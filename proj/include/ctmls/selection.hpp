#pragma once

#include <span>
#include <string>
#include <vector>

#include "ctmls/features.hpp"
#include "ctmls/table.hpp"

namespace ctmls {

struct WelchResult {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
};

// Welch's unequal-variance t statistic with Welch-Satterthwaite degrees of
// freedom; two-sided p via the regularized incomplete beta function. Zero
// pooled variance yields (t=0, p=1) by convention.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a,b), continued-fraction evaluation.
double reg_inc_beta(double a, double b, double x);

struct TTestRow {
    std::string feature;
    double t = 0.0;
    double p = 1.0;
    int rank = 0;  // 1 = largest |t|
    bool selected = false;
    bool backfilled = false;
};

struct SelectionReport {
    std::vector<TTestRow> rows;  // one per DWT feature, original order
    bool backfill_used = false;
};

inline constexpr int kSelectedDwt = 13;
inline constexpr double kSelectionPValue = 0.05;

// Retained feature names per family. DWT is reduced to exactly 13; the other
// families pass through untouched. Total 47.
struct SelectionMask {
    std::vector<std::string> dwt;      // 13, in canonical feature order
    std::vector<std::string> glcm;     // 18
    std::vector<std::string> hum;      // 9
    std::vector<std::string> entropy;  // 7

    std::vector<std::string> all() const;  // 47 names in family order
};

// Per-DWT-feature Welch t across the two label groups of `tag` rows; features
// with p > 0.05 are discarded, survivors ranked by |t| descending, top 13
// kept. If fewer than 13 survive, the shortfall is backfilled by |t| rank
// from the discarded ones and flagged in the report. Call this on the
// training portion only.
SelectionMask select_dwt(const FeatureTable& training_table, SourceTag tag = SourceTag::original,
                         SelectionReport* report = nullptr);

void save_selection_report(const SelectionReport& report, const std::filesystem::path& path);

// Applies the mask to a raw 74-dim vector, producing the 47-dim FV.
FeatureVector apply_mask(const SelectionMask& mask, const FeatureVector& raw);

enum class FusionMode { fv1, ffv1, ffv2 };

std::string to_string(FusionMode mode);
FusionMode fusion_mode_from_string(const std::string& s);

struct FusedVector {
    std::vector<std::string> names;  // source-tag prefixed, unique
    std::vector<double> values;
    FusionMode mode = FusionMode::fv1;
};

// Serial fusion: FV1 -> original alone (47); FFV1 -> [original, roi] (94);
// FFV2 -> [original, thresholded, roi] (141). '+' means concatenation.
FusedVector fuse(const FeatureVector& original, const FeatureVector& thresholded,
                 const FeatureVector& roi, FusionMode mode);

}  // namespace ctmls
