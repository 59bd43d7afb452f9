#include "ctmls/entropy.hpp"

#include <cmath>
#include <string>

#include "ctmls/errors.hpp"

namespace ctmls {

ThresholdTriple make_triple(int t1, int t2, int t3) {
    if (!(1 <= t1 && t1 < t2 && t2 < t3 && t3 <= 255))
        throw DataError("invalid threshold triple (" + std::to_string(t1) + "," +
                        std::to_string(t2) + "," + std::to_string(t3) +
                        "): need 1 <= t1 < t2 < t3 <= 255");
    return ThresholdTriple{t1, t2, t3};
}

ProbabilityDistribution probabilities(const Histogram& hist) {
    if (hist.total == 0) throw DataError("cannot normalize an empty histogram (total = 0)");
    ProbabilityDistribution d;
    const double g = static_cast<double>(hist.total);
    for (int i = 0; i < 256; ++i) d.p[i] = static_cast<double>(hist.counts[i]) / g;
    return d;
}

double kapur_objective(const ProbabilityDistribution& prob, std::span<const int> thresholds,
                       int segments) {
    const int t_count = static_cast<int>(thresholds.size());
    if (segments < 1 || segments > t_count + 1)
        throw DataError("kapur segments must be in [1, T+1]");
    for (int i = 0; i < t_count; ++i) {
        const int lo = i == 0 ? 1 : thresholds[i - 1] + 1;
        if (thresholds[i] < lo || thresholds[i] > 255)
            throw DataError("thresholds must be strictly increasing within [1,255]");
    }

    double total = 0.0;
    for (int k = 0; k < segments; ++k) {
        const int lo = k == 0 ? 0 : thresholds[k - 1];
        const int hi = k == t_count ? 255 : thresholds[k] - 1;
        double omega = 0.0;
        for (int i = lo; i <= hi; ++i) omega += prob.p[i];
        if (omega <= 0.0) continue;
        double e = 0.0;
        for (int i = lo; i <= hi; ++i) {
            const double q = prob.p[i] / omega;
            if (q > 0.0) e -= q * std::log(q);
        }
        total += e;
    }
    return total;
}

double kapur_objective(const ProbabilityDistribution& prob, const ThresholdTriple& th,
                       int segments) {
    const int t[3] = {th.t1, th.t2, th.t3};
    return kapur_objective(prob, std::span<const int>(t, 3), segments);
}

KapurEvaluator::KapurEvaluator(const ProbabilityDistribution& prob, int segments)
    : segments_(segments) {
    if (segments < 1 || segments > 4) throw DataError("kapur segments must be in [1,4]");
    for (int i = 0; i < 256; ++i) {
        const double p = prob.p[i];
        mass_[i + 1] = mass_[i] + p;
        neg_plnp_[i + 1] = neg_plnp_[i] + (p > 0.0 ? -p * std::log(p) : 0.0);
    }
}

double KapurEvaluator::segment_entropy(int lo, int hi) const {
    const double omega = mass_[hi + 1] - mass_[lo];
    if (omega <= 0.0) return 0.0;
    // -sum (p/w) ln(p/w) = (sum -p ln p)/w + ln w
    return (neg_plnp_[hi + 1] - neg_plnp_[lo]) / omega + std::log(omega);
}

double KapurEvaluator::operator()(const ThresholdTriple& th) const {
    double total = segment_entropy(0, th.t1 - 1);
    if (segments_ >= 2) total += segment_entropy(th.t1, th.t2 - 1);
    if (segments_ >= 3) total += segment_entropy(th.t2, th.t3 - 1);
    if (segments_ >= 4) total += segment_entropy(th.t3, 255);
    return total;
}

EntropyFeatureSet entropy_features(std::span<const double> p, const EntropyFeatureParams& params) {
    EntropyFeatureSet f;
    double sum_renyi = 0.0, sum_tsallis = 0.0, sum_kapur_a = 0.0, sum_kapur_b = 0.0;
    double vajda = 0.0, abs_sum = 0.0;
    int support = 0;
    for (const double pi : p) {
        if (pi > 0.0) {
            ++support;
            f.shannon -= pi * std::log(pi);
            sum_renyi += std::pow(pi, params.renyi_alpha);
            sum_tsallis += std::pow(pi, params.tsallis_q);
            sum_kapur_a += std::pow(pi, params.kapur_alpha);
            sum_kapur_b += std::pow(pi, params.kapur_beta);
        }
        vajda += pi * (1.0 - pi);
        abs_sum += std::abs(2.0 * pi - 1.0);
    }
    f.renyi = sum_renyi > 0.0 ? std::log(sum_renyi) / (1.0 - params.renyi_alpha) : 0.0;
    f.tsallis = (1.0 - sum_tsallis) / (params.tsallis_q - 1.0);
    f.vajda = vajda;
    f.max_h = support > 0 ? std::log(static_cast<double>(support)) : 0.0;
    f.kapur_ab = (sum_kapur_a > 0.0 && sum_kapur_b > 0.0)
                     ? std::log(sum_kapur_a / sum_kapur_b) / (params.kapur_beta - params.kapur_alpha)
                     : 0.0;
    f.yager = 1.0 - abs_sum / 256.0;
    return f;
}

EntropyFeatureSet entropy_features(const ProbabilityDistribution& prob,
                                   const EntropyFeatureParams& params) {
    return entropy_features(std::span<const double>(prob.p.data(), prob.p.size()), params);
}

}  // namespace ctmls
