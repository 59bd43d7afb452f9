// ctmls: CT-slice classification pipeline (threshold / segment / features /
// evaluate / pipeline / synth / oracle-bench).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctmls/errors.hpp"
#include "ctmls/pipeline.hpp"
#include "ctmls/rng.hpp"
#include "ctmls/segmentation.hpp"
#include "ctmls/synth.hpp"

namespace fs = std::filesystem;
using namespace ctmls;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct CommonFlags {
    std::string config_file;
    std::uint64_t seed = 1;
    int th = 179;
    std::string fusion = "ffv2";
    std::string classifier = "svm";
    int folds = 5;
    int jobs = 1;
    std::string out_dir = "ctmls-out";

    CLI::Option* seed_opt = nullptr;
    CLI::Option* th_opt = nullptr;
    CLI::Option* fusion_opt = nullptr;
    CLI::Option* classifier_opt = nullptr;
    CLI::Option* folds_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "JSON config file (flags override it)");
        seed_opt = cmd->add_option("--seed", seed, "master seed");
        th_opt = cmd->add_option("--th", th, "roi/artifact filter threshold");
        fusion_opt = cmd->add_option("--fusion", fusion, "fusion mode: fv1|ffv1|ffv2");
        classifier_opt = cmd->add_option("--classifier", classifier, "nb|knn|dt|rf|svm");
        folds_opt = cmd->add_option("--folds", folds, "cross-validation folds");
        jobs_opt = cmd->add_option("--jobs", jobs, "parallel image workers");
        cmd->add_option("--out", out_dir, "output directory");
    }

    RunConfig build() const {
        RunConfig cfg;
        if (!config_file.empty()) cfg = RunConfig::from_json_file(config_file);
        if (seed_opt->count()) cfg.seed = seed;
        if (th_opt->count()) cfg.th = th;
        if (fusion_opt->count()) cfg.fusion = fusion_mode_from_string(fusion);
        if (classifier_opt->count()) cfg.classifier = algorithm_from_string(classifier);
        if (folds_opt->count()) cfg.folds = folds;
        if (jobs_opt->count()) cfg.jobs = jobs;
        cfg.validate();
        return cfg;
    }
};

std::vector<fs::path> resolve_inputs(const std::string& input) {
    if (fs::path(input).extension() == ".csv") {
        const DatasetManifest m = load_manifest(input);
        std::vector<fs::path> paths;
        for (const auto& r : m.records) paths.push_back(r.path);
        return paths;
    }
    return {fs::path(input)};
}

int cmd_threshold(const std::string& input, const CommonFlags& flags, bool oracle) {
    const RunConfig cfg = flags.build();
    const std::vector<fs::path> inputs = resolve_inputs(input);
    const auto outcomes =
        run_threshold_stage(inputs, cfg, flags.out_dir, oracle, /*write_trace=*/true);

    int failures = 0;
    for (const ThresholdOutcome& oc : outcomes) {
        if (!oc.ok) {
            ++failures;
            std::cerr << "FAIL " << oc.input.string() << ": " << oc.error << "\n";
            continue;
        }
        std::printf("%s -> (%d,%d,%d) score %.6f", oc.input.filename().string().c_str(),
                    oc.thresholds.t1, oc.thresholds.t2, oc.thresholds.t3, oc.score);
        if (oc.oracle_score) {
            const double gap =
                *oc.oracle_score > 0 ? 100.0 * (*oc.oracle_score - oc.score) / *oc.oracle_score
                                     : 0.0;
            std::printf("  oracle %.6f  gap %.3f%%", *oc.oracle_score, gap);
        }
        std::printf("  -> %s\n", oc.output.string().c_str());
    }
    if (failures) {
        std::cerr << failures << "/" << outcomes.size() << " inputs failed\n";
        return kExitData;
    }
    return kExitOk;
}

int cmd_segment(const std::string& input, const CommonFlags& flags) {
    const RunConfig cfg = flags.build();
    const std::vector<fs::path> inputs = resolve_inputs(input);
    if (inputs.empty()) throw DataError("no inputs");
    fs::create_directories(flags.out_dir);
    cfg.save(fs::path(flags.out_dir) / "config.json");
    int failures = 0;
    for (const fs::path& p : inputs) {
        try {
            const GrayImage img = load_image(p);
            const RoiPair pair = threshold_filter(img, cfg.th);
            const std::string stem = p.stem().string();
            save_pgm(pair.roi, fs::path(flags.out_dir) / (stem + "_roi.pgm"));
            save_pgm(pair.artifact, fs::path(flags.out_dir) / (stem + "_artifact.pgm"));
            std::printf("%s -> roi/artifact at th=%d\n", p.filename().string().c_str(), cfg.th);
        } catch (const std::exception& e) {
            ++failures;
            std::cerr << "FAIL " << p.string() << ": " << e.what() << "\n";
        }
    }
    return failures ? kExitData : kExitOk;
}

int cmd_features(const std::string& manifest_path, const CommonFlags& flags) {
    const RunConfig cfg = flags.build();
    const DatasetManifest manifest = load_manifest(manifest_path);
    const FeatureStageResult result = run_features_stage(manifest, cfg);

    fs::create_directories(flags.out_dir);
    cfg.save(fs::path(flags.out_dir) / "config.json");
    const fs::path table_path = fs::path(flags.out_dir) / "features.csv";
    save_feature_table(result.table, table_path);
    std::printf("wrote %zu rows x %zu features -> %s\n", result.table.rows.size(),
                result.table.feature_names.size(), table_path.string().c_str());
    if (!result.failures.empty()) {
        std::cerr << result.failures.size() << " file(s) failed:\n";
        for (const FileFailure& f : result.failures)
            std::cerr << "  " << f.path.string() << ": " << f.error << "\n";
        return kExitData;
    }
    return kExitOk;
}

int cmd_evaluate(const std::string& table_path, const CommonFlags& flags, bool all_classifiers,
                 bool all_fusions, bool global_selection) {
    RunConfig cfg = flags.build();
    cfg.global_selection = global_selection || cfg.global_selection;
    const FeatureTable table = load_feature_table(table_path);
    const EvaluateStageResult result =
        run_evaluate_stage(table, cfg, flags.out_dir, all_classifiers, all_fusions);
    for (const CvReport& r : result.reports) {
        std::printf("%-4s %-5s best-fold acc %.4f (fold %d)  mean acc %.4f\n",
                    to_string(r.algorithm).c_str(), to_string(r.fusion).c_str(), r.best().m.acc,
                    r.best_fold, r.mean.acc);
    }
    std::printf("report: %s\n", result.report_json.string().c_str());
    return kExitOk;
}

int cmd_pipeline(const std::string& manifest_path, const CommonFlags& flags, bool dry_run) {
    const RunConfig cfg = flags.build();
    const DatasetManifest manifest = load_manifest(manifest_path);
    if (manifest.records.empty()) throw DataError("no inputs");
    if (dry_run) {
        std::printf("dry run ok: %zu images (%zu normal, %zu covid), config valid\n",
                    manifest.records.size(), manifest.count(kLabelNormal),
                    manifest.count(kLabelCovid));
        return kExitOk;
    }
    const PipelineResult result = run_pipeline(manifest, cfg, flags.out_dir);
    std::printf("best pair: %s + %s, best-fold accuracy %.4f\n",
                to_string(result.best_classifier).c_str(), to_string(result.best_fusion).c_str(),
                result.best_fold_accuracy);
    std::printf("run directory: %s\n", flags.out_dir.c_str());
    return kExitOk;
}

int cmd_synth(std::uint64_t seed, int n_per_class, const std::string& out_dir) {
    const DatasetManifest m = synth_dataset(seed, n_per_class, out_dir);
    std::printf("wrote %zu images + manifest.csv -> %s\n", m.records.size(), out_dir.c_str());
    return kExitOk;
}

int cmd_oracle_bench(const CommonFlags& flags, int cases, int levels) {
    const RunConfig cfg = flags.build();
    if (cases < 1) throw ConfigError("cases must be >= 1");
    if (levels < 8 || levels > 256) throw ConfigError("levels must be in [8,256]");

    int hits = 0;
    double worst_ratio = 1.0;
    for (int c = 0; c < cases; ++c) {
        Rng rng(derive_seed(cfg.seed, 0xbe9c4ULL + c));
        Histogram hist;
        for (int i = 0; i < levels; ++i) hist.counts[i] = 1 + rng.below(1000);
        for (int i = 0; i < 256; ++i) hist.total += hist.counts[i];
        const ProbabilityDistribution prob = probabilities(hist);

        const auto [oth, oscore] = exhaustive_tri_threshold(prob, cfg.kapur_segments);
        const OptResult res = optimize_thresholds(prob, cfg, static_cast<std::uint64_t>(c));
        const double ratio = oscore > 0 ? res.best_score / oscore : 1.0;
        worst_ratio = std::min(worst_ratio, ratio);
        const bool hit = ratio >= 0.995;
        hits += hit ? 1 : 0;
        std::printf("case %2d: cba %.6f  oracle %.6f (%d,%d,%d)  ratio %.5f %s\n", c,
                    res.best_score, oscore, oth.t1, oth.t2, oth.t3, ratio, hit ? "" : "<-- miss");
    }
    std::printf("%d/%d cases within 0.5%% of the exhaustive optimum (worst ratio %.5f)\n", hits,
                cases, worst_ratio);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chaotic-bat Kapur thresholding, texture features, and classical classifiers "
                 "for two-class CT slice datasets"};
    app.require_subcommand(1);

    // threshold
    auto* threshold = app.add_subcommand("threshold", "tri-level Kapur threshold images");
    CommonFlags threshold_flags;
    std::string threshold_input;
    bool threshold_oracle = false;
    threshold->add_option("input", threshold_input, "image file or manifest CSV")->required();
    threshold_flags.attach(threshold);
    threshold->add_flag("--oracle", threshold_oracle, "also run the exhaustive search");

    // segment
    auto* segment = app.add_subcommand("segment", "split image(s) into roi/artifact at --th");
    CommonFlags segment_flags;
    std::string segment_input;
    segment->add_option("input", segment_input, "image file or manifest CSV")->required();
    segment_flags.attach(segment);

    // features
    auto* features = app.add_subcommand("features", "extract the 74-feature table");
    CommonFlags features_flags;
    std::string features_manifest;
    features->add_option("manifest", features_manifest, "manifest CSV")->required();
    features_flags.attach(features);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "select, fuse, cross-validate, report");
    CommonFlags evaluate_flags;
    std::string evaluate_table;
    bool all_classifiers = false, all_fusions = false, global_selection = false;
    evaluate->add_option("table", evaluate_table, "feature table CSV")->required();
    evaluate_flags.attach(evaluate);
    evaluate->add_flag("--all-classifiers", all_classifiers, "sweep nb,knn,dt,rf,svm");
    evaluate->add_flag("--all-fusions", all_fusions, "sweep fv1,ffv1,ffv2");
    evaluate->add_flag("--global-selection", global_selection,
                       "select DWT features once on the full table instead of per fold");

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "threshold -> features -> evaluate");
    CommonFlags pipeline_flags;
    std::string pipeline_manifest;
    bool dry_run = false;
    pipeline->add_option("manifest", pipeline_manifest, "manifest CSV")->required();
    pipeline_flags.attach(pipeline);
    pipeline->add_flag("--dry-run", dry_run, "validate config and manifest, touch nothing");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic dataset");
    std::uint64_t synth_seed = 1;
    int synth_n = 10;
    std::string synth_out = "synth-data";
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--n", synth_n, "images per class")->required();
    synth->add_option("--out", synth_out, "output directory");

    // oracle-bench
    auto* bench = app.add_subcommand("oracle-bench", "optimizer vs exhaustive oracle sweep");
    CommonFlags bench_flags;
    int bench_cases = 20, bench_levels = 64;
    bench_flags.attach(bench);
    bench->add_option("--cases", bench_cases, "number of random histograms");
    bench->add_option("--levels", bench_levels, "nonzero histogram levels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (threshold->parsed())
            return cmd_threshold(threshold_input, threshold_flags, threshold_oracle);
        if (segment->parsed()) return cmd_segment(segment_input, segment_flags);
        if (features->parsed()) return cmd_features(features_manifest, features_flags);
        if (evaluate->parsed())
            return cmd_evaluate(evaluate_table, evaluate_flags, all_classifiers, all_fusions,
                                global_selection);
        if (pipeline->parsed()) return cmd_pipeline(pipeline_manifest, pipeline_flags, dry_run);
        if (synth->parsed()) return cmd_synth(synth_seed, synth_n, synth_out);
        if (bench->parsed()) return cmd_oracle_bench(bench_flags, bench_cases, bench_levels);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}
