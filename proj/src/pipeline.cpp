#include "ctmls/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "ctmls/errors.hpp"
#include "ctmls/rng.hpp"
#include "ctmls/segmentation.hpp"

namespace ctmls {

using nlohmann::json;

namespace {

json config_to_json(const RunConfig& c) {
    return json{{"seed", c.seed},
                {"cba_n_bats", c.cba.n_bats},
                {"cba_max_iter", c.cba.max_iter},
                {"cba_f_min", c.cba.f_min},
                {"cba_f_max", c.cba.f_max},
                {"cba_freq_step", c.cba.freq_step},
                {"cba_alpha", c.cba.alpha},
                {"cba_sigma0", c.cba.sigma0},
                {"cba_lorenz_dt", c.cba.lorenz_dt},
                {"cba_velocity_sign",
                 c.cba.velocity_sign == VelocitySign::paper_literal ? "paper_literal"
                                                                    : "toward_best"},
                {"kapur_segments", c.kapur_segments},
                {"th", c.th},
                {"glcm_levels", c.features.glcm_levels},
                {"renyi_alpha", c.features.entropy.renyi_alpha},
                {"tsallis_q", c.features.entropy.tsallis_q},
                {"kapur_alpha", c.features.entropy.kapur_alpha},
                {"kapur_beta", c.features.entropy.kapur_beta},
                {"fusion", to_string(c.fusion)},
                {"classifier", to_string(c.classifier)},
                {"knn_k", c.hp.knn_k},
                {"dt_max_depth", c.hp.dt_max_depth},
                {"dt_min_leaf", c.hp.dt_min_leaf},
                {"rf_trees", c.hp.rf_trees},
                {"rf_max_depth", c.hp.rf_max_depth},
                {"rf_min_leaf", c.hp.rf_min_leaf},
                {"svm_lambda", c.hp.svm_lambda},
                {"svm_epochs", c.hp.svm_epochs},
                {"nb_var_floor", c.hp.nb_var_floor},
                {"folds", c.folds},
                {"global_selection", c.global_selection},
                {"jobs", c.jobs}};
}

}  // namespace

void RunConfig::validate() const {
    cba.validate();
    if (kapur_segments != 3 && kapur_segments != 4)
        throw ConfigError("kapur_segments must be 3 or 4");
    if (th < 1 || th > 254) throw ConfigError("th must be in [1,254]");
    if (features.glcm_levels < 2 || features.glcm_levels > 256)
        throw ConfigError("glcm_levels must be in [2,256]");
    if (folds < 2) throw ConfigError("folds must be >= 2");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (hp.knn_k < 1) throw ConfigError("knn_k must be >= 1");
    if (hp.rf_trees < 1) throw ConfigError("rf_trees must be >= 1");
    if (hp.svm_epochs < 1) throw ConfigError("svm_epochs must be >= 1");
    if (hp.svm_lambda <= 0.0) throw ConfigError("svm_lambda must be positive");
}

std::string RunConfig::to_json_string() const { return config_to_json(*this).dump(2); }

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    RunConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.cba.n_bats = j.value("cba_n_bats", c.cba.n_bats);
        c.cba.max_iter = j.value("cba_max_iter", c.cba.max_iter);
        c.cba.f_min = j.value("cba_f_min", c.cba.f_min);
        c.cba.f_max = j.value("cba_f_max", c.cba.f_max);
        c.cba.freq_step = j.value("cba_freq_step", c.cba.freq_step);
        c.cba.alpha = j.value("cba_alpha", c.cba.alpha);
        c.cba.sigma0 = j.value("cba_sigma0", c.cba.sigma0);
        c.cba.lorenz_dt = j.value("cba_lorenz_dt", c.cba.lorenz_dt);
        if (j.contains("cba_velocity_sign")) {
            const std::string v = j.at("cba_velocity_sign").get<std::string>();
            if (v == "paper_literal") c.cba.velocity_sign = VelocitySign::paper_literal;
            else if (v == "toward_best") c.cba.velocity_sign = VelocitySign::toward_best;
            else throw ConfigError("cba_velocity_sign must be paper_literal|toward_best");
        }
        c.kapur_segments = j.value("kapur_segments", c.kapur_segments);
        c.th = j.value("th", c.th);
        c.features.glcm_levels = j.value("glcm_levels", c.features.glcm_levels);
        c.features.entropy.renyi_alpha = j.value("renyi_alpha", c.features.entropy.renyi_alpha);
        c.features.entropy.tsallis_q = j.value("tsallis_q", c.features.entropy.tsallis_q);
        c.features.entropy.kapur_alpha = j.value("kapur_alpha", c.features.entropy.kapur_alpha);
        c.features.entropy.kapur_beta = j.value("kapur_beta", c.features.entropy.kapur_beta);
        if (j.contains("fusion")) c.fusion = fusion_mode_from_string(j.at("fusion"));
        if (j.contains("classifier")) c.classifier = algorithm_from_string(j.at("classifier"));
        c.hp.knn_k = j.value("knn_k", c.hp.knn_k);
        c.hp.dt_max_depth = j.value("dt_max_depth", c.hp.dt_max_depth);
        c.hp.dt_min_leaf = j.value("dt_min_leaf", c.hp.dt_min_leaf);
        c.hp.rf_trees = j.value("rf_trees", c.hp.rf_trees);
        c.hp.rf_max_depth = j.value("rf_max_depth", c.hp.rf_max_depth);
        c.hp.rf_min_leaf = j.value("rf_min_leaf", c.hp.rf_min_leaf);
        c.hp.svm_lambda = j.value("svm_lambda", c.hp.svm_lambda);
        c.hp.svm_epochs = j.value("svm_epochs", c.hp.svm_epochs);
        c.hp.nb_var_floor = j.value("nb_var_floor", c.hp.nb_var_floor);
        c.folds = j.value("folds", c.folds);
        c.global_selection = j.value("global_selection", c.global_selection);
        c.jobs = j.value("jobs", c.jobs);
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    return c;
}

void RunConfig::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_json_string() << "\n";
}

OptResult optimize_thresholds(const ProbabilityDistribution& prob, const RunConfig& cfg,
                              std::uint64_t image_index) {
    const KapurEvaluator eval(prob, cfg.kapur_segments);
    CbaConfig cba = cfg.cba;
    cba.seed = derive_seed(cfg.seed, 0x7468ULL ^ image_index);
    return cba_optimize([&eval](const ThresholdTriple& th) { return eval(th); }, cba);
}

std::vector<ThresholdOutcome> run_threshold_stage(const std::vector<std::filesystem::path>& inputs,
                                                  const RunConfig& cfg,
                                                  const std::filesystem::path& out_dir,
                                                  bool with_oracle, bool write_trace) {
    if (inputs.empty()) throw DataError("no inputs");
    std::filesystem::create_directories(out_dir);
    cfg.save(out_dir / "config.json");

    std::vector<ThresholdOutcome> outcomes;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        ThresholdOutcome oc;
        oc.input = inputs[i];
        try {
            const GrayImage img = load_image(inputs[i]);
            const ProbabilityDistribution prob = probabilities(histogram(img));
            const OptResult res = optimize_thresholds(prob, cfg, i);
            oc.thresholds = res.best_thresholds;
            oc.score = res.best_score;
            const QuantizedImage q = apply_trilevel(img, res.best_thresholds);
            oc.output = out_dir / (inputs[i].stem().string() + "_quantized.pgm");
            save_pgm(q.image, oc.output);
            if (write_trace) {
                std::ofstream trace(out_dir / (inputs[i].stem().string() + "_trace.csv"));
                trace << "iter,best_score\n";
                char buf[48];
                for (std::size_t it = 0; it < res.trace.size(); ++it) {
                    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", it, res.trace[it]);
                    trace << buf;
                }
            }
            if (with_oracle) {
                const auto [oth, oscore] = exhaustive_tri_threshold(prob, cfg.kapur_segments);
                oc.oracle_score = oscore;
            }
            oc.ok = true;
        } catch (const std::exception& e) {
            oc.error = e.what();
        }
        outcomes.push_back(std::move(oc));
    }
    return outcomes;
}

namespace {

struct PerImageRows {
    std::vector<TableRow> rows;  // original, thresholded, roi
    bool ok = false;
    std::string error;
};

PerImageRows extract_one(const ManifestRecord& rec, const RunConfig& cfg, std::uint64_t index,
                         const std::filesystem::path* intermediates_dir) {
    PerImageRows out;
    try {
        GrayImage img = load_image(rec.path);
        if (img.width != 512 || img.height != 512) img = resize_bilinear(img, 512, 512);

        const ProbabilityDistribution prob = probabilities(histogram(img));
        const OptResult opt = optimize_thresholds(prob, cfg, index);
        const QuantizedImage quantized = apply_trilevel(img, opt.best_thresholds);
        const RoiPair split = threshold_filter(quantized.image, cfg.th);

        if (intermediates_dir) {
            const std::string stem = rec.path.stem().string();
            save_pgm(quantized.image, *intermediates_dir / (stem + "_quantized.pgm"));
            save_pgm(split.roi, *intermediates_dir / (stem + "_roi.pgm"));
            save_pgm(split.artifact, *intermediates_dir / (stem + "_artifact.pgm"));
        }

        const std::string id = rec.path.filename().string();
        auto make_row = [&](const GrayImage& variant, SourceTag tag) {
            const FeatureVector fv = extract_raw(variant, tag, cfg.features);
            return TableRow{id, tag, fv.values, rec.label};
        };
        out.rows.push_back(make_row(img, SourceTag::original));
        out.rows.push_back(make_row(quantized.image, SourceTag::thresholded));
        out.rows.push_back(make_row(split.roi, SourceTag::roi));
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace

FeatureStageResult run_features_stage(const DatasetManifest& manifest, const RunConfig& cfg,
                                      const std::filesystem::path* intermediates_dir) {
    if (manifest.records.empty()) throw DataError("no inputs");
    if (intermediates_dir) std::filesystem::create_directories(*intermediates_dir);

    const std::size_t n = manifest.records.size();
    std::vector<PerImageRows> results(n);
    const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(n)));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i)
            results[i] = extract_one(manifest.records[i], cfg, i, intermediates_dir);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                results[i] = extract_one(manifest.records[i], cfg, i, intermediates_dir);
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    FeatureStageResult out;
    out.table.feature_names = raw_feature_names();
    for (std::size_t i = 0; i < n; ++i) {
        if (results[i].ok) {
            for (TableRow& row : results[i].rows) out.table.rows.push_back(std::move(row));
        } else {
            out.failures.push_back({manifest.records[i].path, results[i].error});
        }
    }
    return out;
}

void write_report_json(const std::vector<CvReport>& reports, const RunConfig& cfg,
                       const std::filesystem::path& path) {
    json j;
    j["schema_version"] = 1;
    j["config"] = config_to_json(cfg);
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    j["generated_at"] = stamp;  // the only non-deterministic field

    auto metric_json = [](const MetricSet& m) {
        return json{{"fnr", m.fnr}, {"fpr", m.fpr}, {"acc", m.acc}, {"pre", m.pre},
                    {"sen", m.sen}, {"spe", m.spe}, {"npv", m.npv}, {"f1s", m.f1s},
                    {"degenerate", m.degenerate}};
    };

    json runs = json::array();
    for (const CvReport& r : reports) {
        json folds = json::array();
        for (std::size_t f = 0; f < r.folds.size(); ++f) {
            folds.push_back({{"fold", f},
                             {"tp", r.folds[f].cm.tp},
                             {"fn", r.folds[f].cm.fn},
                             {"fp", r.folds[f].cm.fp},
                             {"tn", r.folds[f].cm.tn},
                             {"metrics", metric_json(r.folds[f].m)}});
        }
        runs.push_back({{"classifier", to_string(r.algorithm)},
                        {"fusion", to_string(r.fusion)},
                        {"folds", std::move(folds)},
                        {"mean", metric_json(r.mean)},
                        {"best_fold", r.best_fold},
                        {"best", metric_json(r.best().m)},
                        {"selection_backfilled", r.selection_backfilled}});
    }
    j["runs"] = std::move(runs);

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

EvaluateStageResult run_evaluate_stage(const FeatureTable& table, const RunConfig& cfg,
                                       const std::filesystem::path& out_dir, bool all_classifiers,
                                       bool all_fusions) {
    std::filesystem::create_directories(out_dir);
    cfg.save(out_dir / "config.json");

    std::vector<Algorithm> algs = all_classifiers
                                      ? std::vector<Algorithm>{Algorithm::nb, Algorithm::knn,
                                                               Algorithm::dt, Algorithm::rf,
                                                               Algorithm::svm}
                                      : std::vector<Algorithm>{cfg.classifier};
    std::vector<FusionMode> fusions =
        all_fusions ? std::vector<FusionMode>{FusionMode::fv1, FusionMode::ffv1, FusionMode::ffv2}
                    : std::vector<FusionMode>{cfg.fusion};

    EvaluateStageResult out;
    for (FusionMode fm : fusions) {
        for (Algorithm alg : algs) {
            out.reports.push_back(cross_validate(table, alg, fm, cfg.hp, cfg.folds, cfg.seed,
                                                 cfg.global_selection));
        }
    }

    // Informational full-table ranking (per-fold masks are recomputed inside
    // cross_validate unless global selection is on).
    SelectionReport sel;
    select_dwt(table, SourceTag::original, &sel);
    save_selection_report(sel, out_dir / "selection_report.csv");

    out.report_json = out_dir / "report.json";
    write_report_json(out.reports, cfg, out.report_json);

    out.metrics_csv = out_dir / "metrics.csv";
    {
        std::ofstream csv(out.metrics_csv, std::ios::trunc);
        if (!csv) throw DataError("cannot write " + out.metrics_csv.string());
        csv << "classifier,fusion,fold,tp,fn,fp,tn,fnr,fpr,acc,pre,sen,spe,npv,f1s\n";
        char buf[256];
        for (const CvReport& r : out.reports) {
            for (std::size_t f = 0; f < r.folds.size(); ++f) {
                const ConfusionMatrix& cm = r.folds[f].cm;
                const MetricSet& m = r.folds[f].m;
                std::snprintf(buf, sizeof(buf),
                              "%s,%s,%zu,%ld,%ld,%ld,%ld,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                              to_string(r.algorithm).c_str(), to_string(r.fusion).c_str(), f,
                              cm.tp, cm.fn, cm.fp, cm.tn, m.fnr, m.fpr, m.acc, m.pre, m.sen, m.spe,
                              m.npv, m.f1s);
                csv << buf;
            }
        }
    }

    for (FusionMode fm : fusions) {
        std::vector<NamedMetrics> sets;
        for (const CvReport& r : out.reports)
            if (r.fusion == fm) sets.push_back({to_string(r.algorithm), r.best().m});
        const std::filesystem::path p = out_dir / ("glyphs_" + to_string(fm) + ".svg");
        glyph_svg(sets, p, cfg.to_json_string());
        out.glyphs.push_back(p);
    }
    return out;
}

PipelineResult run_pipeline(const DatasetManifest& manifest, const RunConfig& cfg,
                            const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    cfg.save(out_dir / "config.json");

    PipelineResult result;
    const std::filesystem::path intermediates = out_dir / "intermediates";
    result.features = run_features_stage(manifest, cfg, &intermediates);
    if (!result.features.failures.empty()) {
        std::string msg = "feature extraction failed for " +
                          std::to_string(result.features.failures.size()) + " file(s):";
        for (const FileFailure& f : result.features.failures)
            msg += "\n  " + f.path.string() + ": " + f.error;
        throw DataError(msg);  // stale intermediates must not feed evaluation
    }
    save_feature_table(result.features.table, out_dir / "features.csv");

    result.evaluation = run_evaluate_stage(result.features.table, cfg, out_dir,
                                           /*all_classifiers=*/true, /*all_fusions=*/true);

    double best = -1.0;
    for (const CvReport& r : result.evaluation.reports) {
        if (r.best().m.acc > best) {
            best = r.best().m.acc;
            result.best_classifier = r.algorithm;
            result.best_fusion = r.fusion;
            result.best_fold_accuracy = best;
        }
    }
    return result;
}

}  // namespace ctmls
