#include "ctmls/features.hpp"

#include <algorithm>
#include <cmath>

#include "ctmls/errors.hpp"

namespace ctmls {

std::string to_string(SourceTag tag) {
    switch (tag) {
        case SourceTag::original: return "original";
        case SourceTag::thresholded: return "thresholded";
        case SourceTag::roi: return "roi";
    }
    return "original";
}

SourceTag source_tag_from_string(const std::string& s) {
    if (s == "original") return SourceTag::original;
    if (s == "thresholded") return SourceTag::thresholded;
    if (s == "roi") return SourceTag::roi;
    throw DataError("unknown source tag '" + s + "'");
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// One orthonormal Haar analysis level; input b, outputs with halved dims.
void haar_level(const Band& in, Band& ll, Band& lh, Band& hl, Band& hh) {
    const int w = in.width, h = in.height;
    const int hw = w / 2, hh_ = h / 2;

    Band rows{w, h, std::vector<double>(in.v.size())};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < hw; ++x) {
            const double a = in.at(2 * x, y), b = in.at(2 * x + 1, y);
            rows.at(x, y) = (a + b) * kInvSqrt2;
            rows.at(hw + x, y) = (a - b) * kInvSqrt2;
        }
    }
    ll = Band{hw, hh_, std::vector<double>(static_cast<std::size_t>(hw) * hh_)};
    lh = ll;
    hl = ll;
    hh = ll;
    for (int y = 0; y < hh_; ++y) {
        for (int x = 0; x < hw; ++x) {
            const double la = rows.at(x, 2 * y), lb = rows.at(x, 2 * y + 1);
            const double ha = rows.at(hw + x, 2 * y), hb = rows.at(hw + x, 2 * y + 1);
            ll.at(x, y) = (la + lb) * kInvSqrt2;
            hl.at(x, y) = (la - lb) * kInvSqrt2;
            lh.at(x, y) = (ha + hb) * kInvSqrt2;
            hh.at(x, y) = (ha - hb) * kInvSqrt2;
        }
    }
}

std::array<double, 5> band_stats(const Band& b) {
    const double n = static_cast<double>(b.v.size());
    double sum = 0.0, sum_sq = 0.0;
    for (double c : b.v) {
        sum += c;
        sum_sq += c * c;
    }
    const double mean = sum / n;
    double m2 = 0.0, m4 = 0.0;
    for (double c : b.v) {
        const double d = c - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    const double stddev = std::sqrt(m2);
    const double energy = sum_sq / n;
    double entropy = 0.0;
    if (sum_sq > 0.0) {
        for (double c : b.v) {
            const double q = c * c / sum_sq;
            if (q > 0.0) entropy -= q * std::log(q);
        }
    }
    const double kurtosis = m2 > 1e-24 ? m4 / (m2 * m2) : 0.0;
    return {mean, stddev, energy, entropy, kurtosis};
}

}  // namespace

std::array<Band, 8> haar_decompose2(const GrayImage& img) {
    if (img.width % 4 != 0 || img.height % 4 != 0 || img.width < 4 || img.height < 4)
        throw DataError("two-level Haar transform needs dimensions that are multiples of 4, got " +
                        std::to_string(img.width) + "x" + std::to_string(img.height));
    Band pixels{img.width, img.height, std::vector<double>(img.size())};
    for (std::size_t i = 0; i < img.size(); ++i) pixels.v[i] = static_cast<double>(img.pixels[i]);

    std::array<Band, 8> bands;
    haar_level(pixels, bands[0], bands[1], bands[2], bands[3]);
    haar_level(bands[0], bands[4], bands[5], bands[6], bands[7]);
    return bands;
}

std::vector<double> dwt_features(const GrayImage& img) {
    const std::array<Band, 8> bands = haar_decompose2(img);
    std::vector<double> out;
    out.reserve(40);
    for (const Band& b : bands)
        for (double s : band_stats(b)) out.push_back(s);
    return out;
}

std::vector<double> glcm_matrix(const GrayImage& img, int levels, int dx, int dy) {
    if (levels < 2 || levels > 256) throw ConfigError("glcm levels must be in [2,256]");
    std::vector<double> m(static_cast<std::size_t>(levels) * levels, 0.0);
    auto quant = [&](std::uint8_t p) { return static_cast<int>(p) * levels / 256; };
    double total = 0.0;
    for (int y = 0; y < img.height; ++y) {
        const int ny = y + dy;
        if (ny < 0 || ny >= img.height) continue;
        for (int x = 0; x < img.width; ++x) {
            const int nx = x + dx;
            if (nx < 0 || nx >= img.width) continue;
            const int a = quant(img.at(x, y));
            const int b = quant(img.at(nx, ny));
            // symmetric pair
            m[static_cast<std::size_t>(a) * levels + b] += 1.0;
            m[static_cast<std::size_t>(b) * levels + a] += 1.0;
            total += 2.0;
        }
    }
    if (total > 0.0)
        for (double& v : m) v /= total;
    return m;
}

std::array<double, 18> glcm_descriptors(const std::vector<double>& m, int levels) {
    const int n = levels;
    std::vector<double> px(n, 0.0), py(n, 0.0);
    std::vector<double> psum(2 * n - 1, 0.0), pdiff(n, 0.0);
    double mu_x = 0.0, mu_y = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double p = m[static_cast<std::size_t>(i) * n + j];
            px[i] += p;
            py[j] += p;
            psum[i + j] += p;
            pdiff[std::abs(i - j)] += p;
        }
    }
    for (int i = 0; i < n; ++i) {
        mu_x += i * px[i];
        mu_y += i * py[i];
    }
    double var_x = 0.0, var_y = 0.0, hx = 0.0, hy = 0.0;
    for (int i = 0; i < n; ++i) {
        var_x += (i - mu_x) * (i - mu_x) * px[i];
        var_y += (i - mu_y) * (i - mu_y) * py[i];
        if (px[i] > 0.0) hx -= px[i] * std::log(px[i]);
        if (py[i] > 0.0) hy -= py[i] * std::log(py[i]);
    }

    double contrast = 0.0, energy = 0.0, homogeneity = 0.0, entropy = 0.0, dissimilarity = 0.0;
    double max_prob = 0.0, autocorr = 0.0, shade = 0.0, prominence = 0.0, idmn = 0.0;
    double hxy1 = 0.0, hxy2 = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double p = m[static_cast<std::size_t>(i) * n + j];
            const double d = static_cast<double>(i - j);
            contrast += d * d * p;
            energy += p * p;
            homogeneity += p / (1.0 + d * d);
            dissimilarity += std::abs(d) * p;
            autocorr += static_cast<double>(i) * j * p;
            const double c = i + j - mu_x - mu_y;
            shade += c * c * c * p;
            prominence += c * c * c * c * p;
            idmn += p / (1.0 + d * d / (static_cast<double>(n) * n));
            max_prob = std::max(max_prob, p);
            if (p > 0.0) entropy -= p * std::log(p);
            const double pxy = px[i] * py[j];
            if (pxy > 0.0) {
                if (p > 0.0) hxy1 -= p * std::log(pxy);
                hxy2 -= pxy * std::log(pxy);
            }
        }
    }
    const double sigma_x = std::sqrt(var_x), sigma_y = std::sqrt(var_y);
    const double correlation =
        sigma_x * sigma_y > 1e-12 ? (autocorr - mu_x * mu_y) / (sigma_x * sigma_y) : 0.0;

    double sum_avg = 0.0, sum_ent = 0.0;
    for (int k = 0; k < 2 * n - 1; ++k) {
        sum_avg += k * psum[k];
        if (psum[k] > 0.0) sum_ent -= psum[k] * std::log(psum[k]);
    }
    double sum_var = 0.0;
    for (int k = 0; k < 2 * n - 1; ++k) sum_var += (k - sum_avg) * (k - sum_avg) * psum[k];

    double diff_avg = 0.0, diff_ent = 0.0;
    for (int k = 0; k < n; ++k) {
        diff_avg += k * pdiff[k];
        if (pdiff[k] > 0.0) diff_ent -= pdiff[k] * std::log(pdiff[k]);
    }
    double diff_var = 0.0;
    for (int k = 0; k < n; ++k) diff_var += (k - diff_avg) * (k - diff_avg) * pdiff[k];

    const double hmax = std::max(hx, hy);
    const double imc1 = hmax > 1e-12 ? (entropy - hxy1) / hmax : 0.0;
    const double imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - entropy))));

    return {contrast,   correlation, energy,   homogeneity, entropy,    dissimilarity,
            max_prob,   sum_avg,     sum_var,  sum_ent,     diff_var,   diff_ent,
            autocorr,   shade,       prominence, imc1,      imc2,       idmn};
}

std::vector<double> glcm_features(const GrayImage& img, const FeatureConfig& cfg) {
    static constexpr int offsets[4][2] = {{1, 0}, {1, -1}, {0, -1}, {-1, -1}};
    std::array<double, 18> acc{};
    for (const auto& off : offsets) {
        const std::vector<double> m = glcm_matrix(img, cfg.glcm_levels, off[0], off[1]);
        const std::array<double, 18> d = glcm_descriptors(m, cfg.glcm_levels);
        for (int i = 0; i < 18; ++i) acc[i] += d[i];
    }
    std::vector<double> out(acc.begin(), acc.end());
    for (double& v : out) v /= 4.0;
    return out;
}

std::vector<double> hu_features(const GrayImage& img) {
    double mass = 0.0;
    for (std::uint8_t p : img.pixels) mass += p;
    if (mass <= 0.0) throw DataError("Hu moments are degenerate on an all-zero image");

    // Moments of the intensity-normalized image (invariant to intensity scale).
    double m00 = 0.0, m10 = 0.0, m01 = 0.0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double w = img.at(x, y) / mass;
            m00 += w;
            m10 += w * x;
            m01 += w * y;
        }
    const double cx = m10 / m00, cy = m01 / m00;

    double mu[4][4] = {};
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double w = img.at(x, y) / mass;
            if (w == 0.0) continue;
            const double dx = x - cx, dy = y - cy;
            double xp = 1.0;
            for (int p = 0; p <= 3; ++p) {
                double yp = 1.0;
                for (int q = 0; q + p <= 3; ++q) {
                    mu[p][q] += w * xp * yp;
                    yp *= dy;
                }
                xp *= dx;
            }
        }

    auto eta = [&](int p, int q) {
        return mu[p][q] / std::pow(mu[0][0], 1.0 + (p + q) / 2.0);
    };
    const double n20 = eta(2, 0), n02 = eta(0, 2), n11 = eta(1, 1);
    const double n30 = eta(3, 0), n03 = eta(0, 3), n21 = eta(2, 1), n12 = eta(1, 2);

    const double a = n30 + n12, b = n21 + n03;
    std::array<double, 8> h{};
    h[0] = n20 + n02;
    h[1] = (n20 - n02) * (n20 - n02) + 4.0 * n11 * n11;
    h[2] = (n30 - 3 * n12) * (n30 - 3 * n12) + (3 * n21 - n03) * (3 * n21 - n03);
    h[3] = a * a + b * b;
    h[4] = (n30 - 3 * n12) * a * (a * a - 3 * b * b) + (3 * n21 - n03) * b * (3 * a * a - b * b);
    h[5] = (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b;
    h[6] = (3 * n21 - n03) * a * (a * a - 3 * b * b) - (n30 - 3 * n12) * b * (3 * a * a - b * b);
    // Flusser's eighth invariant, completing Hu's dependent set.
    h[7] = n11 * (a * a - b * b) - (n20 - n02) * a * b;

    std::vector<double> out;
    out.reserve(9);
    for (double v : h) {
        const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        out.push_back(-sign * std::log10(std::abs(v) + 1e-30));
    }

    const double tr = mu[2][0] + mu[0][2];
    const double det = std::sqrt((mu[2][0] - mu[0][2]) * (mu[2][0] - mu[0][2]) +
                                 4.0 * mu[1][1] * mu[1][1]);
    const double l1 = (tr + det) / 2.0, l2 = (tr - det) / 2.0;
    out.push_back(l1 > 1e-24 ? std::sqrt(std::max(0.0, 1.0 - l2 / l1)) : 0.0);
    return out;
}

const std::vector<std::string>& raw_feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        n.reserve(74);
        const char* bands[8] = {"LL1", "LH1", "HL1", "HH1", "LL2", "LH2", "HL2", "HH2"};
        const char* stats[5] = {"mean", "std", "energy", "entropy", "kurtosis"};
        for (const char* b : bands)
            for (const char* s : stats) n.push_back(std::string("dwt_") + b + "_" + s);
        const char* glcm[18] = {"contrast",       "correlation",   "energy",
                                "homogeneity",    "entropy",       "dissimilarity",
                                "max_prob",       "sum_average",   "sum_variance",
                                "sum_entropy",    "diff_variance", "diff_entropy",
                                "autocorrelation", "cluster_shade", "cluster_prominence",
                                "imc1",           "imc2",          "idmn"};
        for (const char* g : glcm) n.push_back(std::string("glcm_") + g);
        for (int i = 1; i <= 7; ++i) n.push_back("hu_h" + std::to_string(i));
        n.push_back("hu_flusser");
        n.push_back("hu_eccentricity");
        const char* ent[7] = {"kapur_ab", "max_h", "renyi", "tsallis", "shannon", "vajda", "yager"};
        for (const char* e : ent) n.push_back(std::string("ent_") + e);
        return n;
    }();
    return names;
}

FeatureVector extract_raw(const GrayImage& img, SourceTag tag, const FeatureConfig& cfg) {
    FeatureVector fv;
    fv.tag = tag;
    fv.names = raw_feature_names();
    fv.values = dwt_features(img);
    const std::vector<double> g = glcm_features(img, cfg);
    fv.values.insert(fv.values.end(), g.begin(), g.end());
    const std::vector<double> hu = hu_features(img);
    fv.values.insert(fv.values.end(), hu.begin(), hu.end());
    const EntropyFeatureSet ent = entropy_features(probabilities(histogram(img)), cfg.entropy);
    const std::array<double, 7> ea = ent.as_array();
    fv.values.insert(fv.values.end(), ea.begin(), ea.end());
    return fv;
}

}  // namespace ctmls
