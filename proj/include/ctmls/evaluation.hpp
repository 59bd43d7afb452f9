#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ctmls/classifiers.hpp"
#include "ctmls/selection.hpp"
#include "ctmls/table.hpp"

namespace ctmls {

// covid is the positive class: tp counts actual-covid predicted-covid.
struct ConfusionMatrix {
    long tp = 0;
    long fn = 0;
    long fp = 0;
    long tn = 0;
};

struct MetricSet {
    double fnr = 0.0;
    double fpr = 0.0;
    double acc = 0.0;
    double pre = 0.0;
    double sen = 0.0;
    double spe = 0.0;
    double npv = 0.0;
    double f1s = 0.0;
    bool degenerate = false;  // some denominator was zero; affected ratios are 0
};

// Exact ratio arithmetic; zero denominators yield 0 and set the flag instead
// of throwing, so batch sweeps survive pathological folds.
MetricSet metrics(const ConfusionMatrix& cm);

ConfusionMatrix confusion(const std::vector<std::string>& predictions,
                          const std::vector<std::string>& truth);

// Fold id per sample; per-class counts across folds differ by at most 1.
// Throws when any class has fewer than k members.
std::vector<int> stratified_kfold(const std::vector<std::string>& labels, int k,
                                  std::uint64_t seed);

struct FoldResult {
    ConfusionMatrix cm;
    MetricSet m;
};

struct CvReport {
    Algorithm algorithm = Algorithm::nb;
    FusionMode fusion = FusionMode::fv1;
    int folds_k = 5;
    std::uint64_t seed = 1;
    bool global_selection = false;
    Hyperparams hp;
    std::vector<FoldResult> folds;
    MetricSet mean;
    int best_fold = 0;  // by accuracy, lowest index on ties
    bool selection_backfilled = false;

    const FoldResult& best() const { return folds[best_fold]; }
};

// Stratified k-fold cross-validation over a long-format feature table
// (three variant rows per image). Per fold: DWT selection on the training
// originals (or once globally), mask + fuse per image, fit, predict the held
// out images. Pure function of (table, parameters, seed).
CvReport cross_validate(const FeatureTable& table, Algorithm alg, FusionMode fusion,
                        const Hyperparams& hp, int k, std::uint64_t seed,
                        bool global_selection = false);

struct NamedMetrics {
    std::string name;
    MetricSet m;
};

// Star-glyph plot: one glyph per entry, six spokes (ACC, PRE, SEN, SPE, F1S,
// NPV) at 60-degree steps starting at 12 o'clock, gridline circles at
// 0.25/0.5/0.75/1.0. Standalone SVG.
void glyph_svg(const std::vector<NamedMetrics>& sets, const std::filesystem::path& path,
               const std::string& description = "");

}  // namespace ctmls
