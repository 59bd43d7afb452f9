#include "ctmls/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "ctmls/errors.hpp"
#include "ctmls/manifest.hpp"

namespace ctmls {

namespace {

double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16, kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double sample_mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw DataError("welch_t needs at least 2 samples per group, got " +
                        std::to_string(a.size()) + " and " + std::to_string(b.size()));
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = sample_mean(a), mb = sample_mean(b);
    const double va = sample_var(a, ma) / na, vb = sample_var(b, mb) / nb;
    const double se2 = va + vb;
    if (se2 <= 0.0) return {0.0, 1.0, na + nb - 2.0};

    WelchResult r;
    r.t = (ma - mb) / std::sqrt(se2);
    r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p = reg_inc_beta(r.df / 2.0, 0.5, r.df / (r.df + r.t * r.t));
    return r;
}

std::vector<std::string> SelectionMask::all() const {
    std::vector<std::string> out;
    out.reserve(dwt.size() + glcm.size() + hum.size() + entropy.size());
    for (const auto* family : {&dwt, &glcm, &hum, &entropy})
        out.insert(out.end(), family->begin(), family->end());
    return out;
}

SelectionMask select_dwt(const FeatureTable& table, SourceTag tag, SelectionReport* report) {
    // Column values for the chosen variant, split by label.
    std::vector<std::size_t> dwt_cols;
    SelectionMask mask;
    for (std::size_t c = 0; c < table.feature_names.size(); ++c) {
        const std::string& n = table.feature_names[c];
        if (n.starts_with("dwt_")) dwt_cols.push_back(c);
        else if (n.starts_with("glcm_")) mask.glcm.push_back(n);
        else if (n.starts_with("hu_")) mask.hum.push_back(n);
        else if (n.starts_with("ent_")) mask.entropy.push_back(n);
        else throw DataError("feature '" + n + "' does not belong to a known family");
    }

    std::vector<std::size_t> rows;
    bool has_normal = false, has_covid = false;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].tag != tag) continue;
        rows.push_back(i);
        (table.rows[i].label == kLabelCovid ? has_covid : has_normal) = true;
    }
    if (!has_normal || !has_covid)
        throw DataError("feature selection needs both labels in the training rows");

    struct Scored {
        std::size_t order;  // position among DWT features
        std::string name;
        WelchResult w;
    };
    std::vector<Scored> scored;
    scored.reserve(dwt_cols.size());
    for (std::size_t k = 0; k < dwt_cols.size(); ++k) {
        const std::size_t c = dwt_cols[k];
        std::vector<double> ga, gb;
        for (std::size_t i : rows) {
            (table.rows[i].label == kLabelCovid ? ga : gb).push_back(table.rows[i].values[c]);
        }
        scored.push_back({k, table.feature_names[c], welch_t(ga, gb)});
    }

    // Rank everything by |t| descending; ties keep canonical feature order.
    std::vector<std::size_t> by_t(scored.size());
    std::iota(by_t.begin(), by_t.end(), 0);
    std::stable_sort(by_t.begin(), by_t.end(), [&](std::size_t i, std::size_t j) {
        return std::abs(scored[i].w.t) > std::abs(scored[j].w.t);
    });

    const int want = std::min<int>(kSelectedDwt, static_cast<int>(scored.size()));
    std::vector<bool> selected(scored.size(), false), backfilled(scored.size(), false);
    int taken = 0;
    for (std::size_t idx : by_t) {
        if (taken >= want) break;
        if (scored[idx].w.p <= kSelectionPValue) {
            selected[idx] = true;
            ++taken;
        }
    }
    bool used_backfill = false;
    if (taken < want) {  // too few significant features; backfill by |t| rank
        used_backfill = true;
        for (std::size_t idx : by_t) {
            if (taken >= want) break;
            if (!selected[idx]) {
                selected[idx] = true;
                backfilled[idx] = true;
                ++taken;
            }
        }
    }

    std::vector<int> rank_of(scored.size());
    for (std::size_t r = 0; r < by_t.size(); ++r) rank_of[by_t[r]] = static_cast<int>(r) + 1;

    // Mask keeps canonical feature order for stable downstream layouts.
    for (const Scored& s : scored)
        if (selected[s.order]) mask.dwt.push_back(s.name);

    if (report) {
        report->rows.clear();
        report->backfill_used = used_backfill;
        for (const Scored& s : scored)
            report->rows.push_back({s.name, s.w.t, s.w.p, rank_of[s.order], selected[s.order],
                                    backfilled[s.order]});
    }
    return mask;
}

void save_selection_report(const SelectionReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << "feature,t,p,rank,selected\n";
    char buf[64];
    for (const TTestRow& r : report.rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", r.t, r.p);
        out << r.feature << "," << buf << "," << r.rank << "," << (r.selected ? 1 : 0) << "\n";
    }
}

FeatureVector apply_mask(const SelectionMask& mask, const FeatureVector& raw) {
    FeatureVector out;
    out.tag = raw.tag;
    const std::vector<std::string> keep = mask.all();
    out.names.reserve(keep.size());
    out.values.reserve(keep.size());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < raw.names.size(); ++i) index[raw.names[i]] = i;
    for (const std::string& n : keep) {
        const auto it = index.find(n);
        if (it == index.end()) throw DataError("mask feature '" + n + "' missing from raw vector");
        out.names.push_back(n);
        out.values.push_back(raw.values[it->second]);
    }
    return out;
}

std::string to_string(FusionMode mode) {
    switch (mode) {
        case FusionMode::fv1: return "fv1";
        case FusionMode::ffv1: return "ffv1";
        case FusionMode::ffv2: return "ffv2";
    }
    return "fv1";
}

FusionMode fusion_mode_from_string(const std::string& s) {
    if (s == "fv1") return FusionMode::fv1;
    if (s == "ffv1") return FusionMode::ffv1;
    if (s == "ffv2") return FusionMode::ffv2;
    throw ConfigError("unknown fusion mode '" + s + "' (expected fv1|ffv1|ffv2)");
}

FusedVector fuse(const FeatureVector& original, const FeatureVector& thresholded,
                 const FeatureVector& roi, FusionMode mode) {
    const FeatureVector* inputs[3] = {&original, &thresholded, &roi};
    for (const FeatureVector* fv : inputs) {
        if (fv->values.size() != original.values.size() || fv->names != original.names)
            throw DataError("fusion inputs must share dimension and names (modulo source tag)");
    }

    std::vector<const FeatureVector*> parts;
    switch (mode) {
        case FusionMode::fv1: parts = {&original}; break;
        case FusionMode::ffv1: parts = {&original, &roi}; break;
        case FusionMode::ffv2: parts = {&original, &thresholded, &roi}; break;
    }

    FusedVector out;
    out.mode = mode;
    for (const FeatureVector* fv : parts) {
        const std::string prefix = to_string(fv->tag) + "_";
        for (std::size_t i = 0; i < fv->names.size(); ++i) {
            out.names.push_back(prefix + fv->names[i]);
            out.values.push_back(fv->values[i]);
        }
    }
    return out;
}

}  // namespace ctmls
