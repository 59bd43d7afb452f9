#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ctmls/evaluation.hpp"
#include "ctmls/features.hpp"
#include "ctmls/manifest.hpp"
#include "ctmls/optimizer.hpp"
#include "ctmls/selection.hpp"
#include "ctmls/table.hpp"

namespace ctmls {

// One validated configuration drives a whole run; it is echoed verbatim into
// every run directory and report.
struct RunConfig {
    std::uint64_t seed = 1;
    CbaConfig cba;            // per-image optimizer settings (cba.seed derived per image)
    int kapur_segments = 4;   // 3 reproduces the three-term objective reading
    int th = 179;             // roi/artifact filter level
    FeatureConfig features;
    FusionMode fusion = FusionMode::ffv2;
    Algorithm classifier = Algorithm::svm;
    Hyperparams hp;
    int folds = 5;
    bool global_selection = false;
    int jobs = 1;

    void validate() const;
    std::string to_json_string() const;
    static RunConfig from_json_file(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

// Optimizes thresholds for one distribution with per-image seed derivation.
OptResult optimize_thresholds(const ProbabilityDistribution& prob, const RunConfig& cfg,
                              std::uint64_t image_index);

struct ThresholdOutcome {
    std::filesystem::path input;
    std::filesystem::path output;  // quantized PGM
    ThresholdTriple thresholds;
    double score = 0.0;
    std::optional<double> oracle_score;  // when requested
    bool ok = false;
    std::string error;
};

// threshold subcommand body: histogram -> CBA+Kapur -> tri-level quantize ->
// save PGM (+ trace CSV); per-file failures are collected, not fatal.
std::vector<ThresholdOutcome> run_threshold_stage(const std::vector<std::filesystem::path>& inputs,
                                                  const RunConfig& cfg,
                                                  const std::filesystem::path& out_dir,
                                                  bool with_oracle, bool write_trace);

struct FileFailure {
    std::filesystem::path path;
    std::string error;
};

struct FeatureStageResult {
    FeatureTable table;
    std::vector<FileFailure> failures;
};

// features subcommand body: per image resize(512) -> CBA threshold -> filter
// -> extract 74 features from {original, thresholded, roi}. Row order follows
// the manifest regardless of jobs. Optionally saves intermediate PGMs.
FeatureStageResult run_features_stage(const DatasetManifest& manifest, const RunConfig& cfg,
                                      const std::filesystem::path* intermediates_dir = nullptr);

struct EvaluateStageResult {
    std::vector<CvReport> reports;  // one per (classifier, fusion) pair
    std::filesystem::path report_json;
    std::filesystem::path metrics_csv;
    std::vector<std::filesystem::path> glyphs;
};

// evaluate subcommand body; sweeps are the cartesian product of the selected
// classifiers and fusion modes. Writes report.json, metrics.csv, one glyph
// SVG per fusion mode, and the full-table selection report.
EvaluateStageResult run_evaluate_stage(const FeatureTable& table, const RunConfig& cfg,
                                       const std::filesystem::path& out_dir, bool all_classifiers,
                                       bool all_fusions);

struct PipelineResult {
    FeatureStageResult features;
    EvaluateStageResult evaluation;
    Algorithm best_classifier = Algorithm::svm;
    FusionMode best_fusion = FusionMode::ffv2;
    double best_fold_accuracy = 0.0;
};

// Full run: threshold+features (with intermediates) -> table.csv -> evaluate.
// The run directory is self-contained: config.json, intermediates/, table,
// reports. Evaluation always sweeps all classifiers and fusion modes.
PipelineResult run_pipeline(const DatasetManifest& manifest, const RunConfig& cfg,
                            const std::filesystem::path& out_dir);

// report.json writer (exposed for determinism tests).
void write_report_json(const std::vector<CvReport>& reports, const RunConfig& cfg,
                       const std::filesystem::path& path);

}  // namespace ctmls
