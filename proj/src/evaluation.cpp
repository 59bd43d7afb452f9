#include "ctmls/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "ctmls/errors.hpp"
#include "ctmls/manifest.hpp"
#include "ctmls/rng.hpp"

namespace ctmls {

MetricSet metrics(const ConfusionMatrix& cm) {
    if (cm.tp < 0 || cm.fn < 0 || cm.fp < 0 || cm.tn < 0)
        throw DataError("confusion counts must be non-negative");
    MetricSet m;
    auto ratio = [&m](long num, long den) {
        if (den == 0) {
            m.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.fnr = ratio(cm.fn, cm.fn + cm.tp);
    m.fpr = ratio(cm.fp, cm.fp + cm.tn);
    m.acc = ratio(cm.tp + cm.tn, cm.tp + cm.tn + cm.fp + cm.fn);
    m.pre = ratio(cm.tp, cm.tp + cm.fp);
    m.sen = ratio(cm.tp, cm.tp + cm.fn);
    m.spe = ratio(cm.tn, cm.tn + cm.fp);
    m.npv = ratio(cm.tn, cm.tn + cm.fn);
    m.f1s = ratio(2 * cm.tp, 2 * cm.tp + cm.fn + cm.fp);
    return m;
}

ConfusionMatrix confusion(const std::vector<std::string>& predictions,
                          const std::vector<std::string>& truth) {
    if (predictions.size() != truth.size())
        throw DataError("predictions and truth differ in length (" +
                        std::to_string(predictions.size()) + " vs " +
                        std::to_string(truth.size()) + ")");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool actual = truth[i] == kLabelCovid;
        const bool predicted = predictions[i] == kLabelCovid;
        if (actual && predicted) ++cm.tp;
        else if (actual && !predicted) ++cm.fn;
        else if (!actual && predicted) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

std::vector<int> stratified_kfold(const std::vector<std::string>& labels, int k,
                                  std::uint64_t seed) {
    if (k < 2) throw ConfigError("folds must be >= 2");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i] == kLabelCovid ? 1 : 0].push_back(i);
    for (int c = 0; c < 2; ++c)
        if (by_class[c].size() < static_cast<std::size_t>(k))
            throw DataError("class '" + std::string(c == 1 ? kLabelCovid : kLabelNormal) +
                            "' has " + std::to_string(by_class[c].size()) +
                            " samples, fewer than " + std::to_string(k) + " folds");

    Rng rng(derive_seed(seed, 0xf01d5ULL));
    std::vector<int> fold(labels.size(), -1);
    for (int c = 0; c < 2; ++c) {
        rng.shuffle(by_class[c]);
        for (std::size_t i = 0; i < by_class[c].size(); ++i)
            fold[by_class[c][i]] = static_cast<int>(i % k);
    }
    return fold;
}

namespace {

struct ImageRecord {
    std::string image;
    std::string label;
    const TableRow* variant[3] = {nullptr, nullptr, nullptr};  // original/thresholded/roi
};

std::vector<ImageRecord> pivot(const FeatureTable& table) {
    std::vector<ImageRecord> records;
    std::map<std::string, std::size_t> index;
    for (const TableRow& row : table.rows) {
        auto [it, inserted] = index.try_emplace(row.image, records.size());
        if (inserted) records.push_back({row.image, row.label, {}});
        ImageRecord& rec = records[it->second];
        if (rec.label != row.label)
            throw DataError("image " + row.image + " appears with conflicting labels");
        const int v = static_cast<int>(row.tag);
        if (rec.variant[v]) throw DataError("duplicate " + to_string(row.tag) + " row for " + row.image);
        rec.variant[v] = &row;
    }
    for (const ImageRecord& r : records)
        for (int v = 0; v < 3; ++v)
            if (!r.variant[v])
                throw DataError("image " + r.image + " is missing its " +
                                to_string(static_cast<SourceTag>(v)) + " row");
    return records;
}

FeatureVector raw_vector(const FeatureTable& table, const TableRow& row) {
    return FeatureVector{table.feature_names, row.values, row.tag};
}

MetricSet mean_metrics(const std::vector<FoldResult>& folds) {
    MetricSet mean;
    for (const FoldResult& f : folds) {
        mean.fnr += f.m.fnr;
        mean.fpr += f.m.fpr;
        mean.acc += f.m.acc;
        mean.pre += f.m.pre;
        mean.sen += f.m.sen;
        mean.spe += f.m.spe;
        mean.npv += f.m.npv;
        mean.f1s += f.m.f1s;
        mean.degenerate = mean.degenerate || f.m.degenerate;
    }
    const double n = static_cast<double>(folds.size());
    mean.fnr /= n;
    mean.fpr /= n;
    mean.acc /= n;
    mean.pre /= n;
    mean.sen /= n;
    mean.spe /= n;
    mean.npv /= n;
    mean.f1s /= n;
    return mean;
}

}  // namespace

CvReport cross_validate(const FeatureTable& table, Algorithm alg, FusionMode fusion,
                        const Hyperparams& hp, int k, std::uint64_t seed, bool global_selection) {
    const std::vector<ImageRecord> records = pivot(table);
    std::vector<std::string> labels;
    labels.reserve(records.size());
    for (const ImageRecord& r : records) labels.push_back(r.label);

    const std::vector<int> fold_of = stratified_kfold(labels, k, seed);

    CvReport report;
    report.algorithm = alg;
    report.fusion = fusion;
    report.folds_k = k;
    report.seed = seed;
    report.global_selection = global_selection;
    report.hp = hp;

    SelectionMask global_mask;
    if (global_selection) {
        SelectionReport sel;
        global_mask = select_dwt(table, SourceTag::original, &sel);
        report.selection_backfilled = sel.backfill_used;
    }

    auto fused_values = [&](const ImageRecord& rec, const SelectionMask& mask) {
        const FeatureVector fv1 = apply_mask(mask, raw_vector(table, *rec.variant[0]));
        const FeatureVector fv2 = apply_mask(mask, raw_vector(table, *rec.variant[1]));
        const FeatureVector fv3 = apply_mask(mask, raw_vector(table, *rec.variant[2]));
        return fuse(fv1, fv2, fv3, fusion).values;
    };

    for (int f = 0; f < k; ++f) {
        SelectionMask mask = global_mask;
        if (!global_selection) {
            std::map<std::string, int> fold_by_image;
            for (std::size_t i = 0; i < records.size(); ++i)
                fold_by_image[records[i].image] = fold_of[i];
            FeatureTable train_table;
            train_table.feature_names = table.feature_names;
            for (const TableRow& row : table.rows)
                if (fold_by_image.at(row.image) != f) train_table.rows.push_back(row);
            SelectionReport sel;
            mask = select_dwt(train_table, SourceTag::original, &sel);
            report.selection_backfilled = report.selection_backfilled || sel.backfill_used;
        }

        std::vector<std::vector<double>> x_train;
        std::vector<int> y_train;
        std::vector<std::size_t> test_indices;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (fold_of[i] == f) {
                test_indices.push_back(i);
            } else {
                x_train.push_back(fused_values(records[i], mask));
                y_train.push_back(records[i].label == kLabelCovid ? 1 : 0);
            }
        }

        const TrainedModel model = fit(alg, x_train, y_train, hp, derive_seed(seed, 100 + f));

        std::vector<std::string> predictions, truth;
        for (std::size_t i : test_indices) {
            const std::vector<double> xv = fused_values(records[i], mask);
            predictions.push_back(predict(model, xv).label);
            truth.push_back(records[i].label);
        }
        FoldResult fr;
        fr.cm = confusion(predictions, truth);
        fr.m = metrics(fr.cm);
        report.folds.push_back(fr);
    }

    report.mean = mean_metrics(report.folds);
    report.best_fold = 0;
    for (std::size_t i = 1; i < report.folds.size(); ++i)
        if (report.folds[i].m.acc > report.folds[report.best_fold].m.acc)
            report.best_fold = static_cast<int>(i);
    return report;
}

void glyph_svg(const std::vector<NamedMetrics>& sets, const std::filesystem::path& path,
               const std::string& description) {
    if (sets.empty()) throw DataError("glyph plot needs at least one metric set");

    constexpr double kCell = 220.0, kRadius = 80.0, kCx = 110.0, kCy = 105.0;
    const char* spoke_names[6] = {"ACC", "PRE", "SEN", "SPE", "F1S", "NPV"};

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    const double width = kCell * static_cast<double>(sets.size());
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"250\" viewBox=\"0 0 " << width << " 250\">\n";
    if (!description.empty()) out << "  <desc>" << description << "</desc>\n";

    char buf[160];
    for (std::size_t g = 0; g < sets.size(); ++g) {
        const double cx = kCx + kCell * static_cast<double>(g);
        const double values[6] = {sets[g].m.acc, sets[g].m.pre, sets[g].m.sen,
                                  sets[g].m.spe, sets[g].m.f1s, sets[g].m.npv};
        out << "  <g class=\"glyph\">\n";
        for (double r : {0.25, 0.5, 0.75, 1.0}) {
            std::snprintf(buf, sizeof(buf),
                          "    <circle class=\"grid\" cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" "
                          "fill=\"none\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n",
                          cx, kCy, kRadius * r);
            out << buf;
        }
        std::string polygon;
        for (int s = 0; s < 6; ++s) {
            const double angle = -1.5707963267948966 + s * 1.0471975511965976;  // from 12 o'clock
            const double len = kRadius * std::clamp(values[s], 0.0, 1.0);
            const double x = cx + len * std::cos(angle);
            const double y = kCy + len * std::sin(angle);
            std::snprintf(buf, sizeof(buf),
                          "    <line class=\"spoke\" x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" "
                          "y2=\"%.2f\" stroke=\"#1f6fb2\" stroke-width=\"1.5\"/>\n",
                          cx, kCy, x, y);
            out << buf;
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", x, y);
            polygon += buf;
            const double lx = cx + (kRadius + 12.0) * std::cos(angle);
            const double ly = kCy + (kRadius + 12.0) * std::sin(angle);
            std::snprintf(buf, sizeof(buf),
                          "    <text x=\"%.2f\" y=\"%.2f\" font-size=\"8\" "
                          "text-anchor=\"middle\">%s</text>\n",
                          lx, ly + 2.5, spoke_names[s]);
            out << buf;
        }
        out << "    <polygon class=\"outline\" points=\"" << polygon
            << "\" fill=\"#1f6fb2\" fill-opacity=\"0.25\" stroke=\"#1f6fb2\"/>\n";
        std::snprintf(buf, sizeof(buf),
                      "    <text x=\"%.2f\" y=\"235\" font-size=\"11\" "
                      "text-anchor=\"middle\">%s</text>\n",
                      cx, sets[g].name.c_str());
        out << buf;
        out << "  </g>\n";
    }
    out << "</svg>\n";
    if (!out) throw DataError("short write to " + path.string());
}

}  // namespace ctmls
