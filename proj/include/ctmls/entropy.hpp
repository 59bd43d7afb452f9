#pragma once

#include <array>
#include <span>
#include <vector>

#include "ctmls/image.hpp"

namespace ctmls {

// Normalized 256-bin intensity distribution.
struct ProbabilityDistribution {
    std::array<double, 256> p{};
};

// Sorted integer gray-level thresholds, 1 <= t1 < t2 < t3 <= 255.
struct ThresholdTriple {
    int t1 = 0;
    int t2 = 0;
    int t3 = 0;

    bool operator==(const ThresholdTriple&) const = default;
};

// Throws DataError when the invariant 1 <= t1 < t2 < t3 <= 255 fails.
ThresholdTriple make_triple(int t1, int t2, int t3);

ProbabilityDistribution probabilities(const Histogram& hist);

// Kapur's entropy objective: the sum of Shannon entropies of the histogram
// segments cut at the thresholds. For thresholds (t1..tT) the segments are
// [0,t1-1], [t1,t2-1], ..., [t_T,255]; `segments` selects how many of the
// T+1 segments enter the sum (T keeps the classical three-term form that
// ignores [t_T,255]; T+1 covers the whole range). Empty segments and zero
// bins contribute nothing.
double kapur_objective(const ProbabilityDistribution& prob, std::span<const int> thresholds,
                       int segments);

// Tri-level form; segments defaults to all four.
double kapur_objective(const ProbabilityDistribution& prob, const ThresholdTriple& th,
                       int segments = 4);

// Prefix-sum accelerated evaluator for the same objective; O(1) per triple.
// Agrees with kapur_objective to ~1e-12 (verified by tests).
class KapurEvaluator {
public:
    explicit KapurEvaluator(const ProbabilityDistribution& prob, int segments = 4);

    double operator()(const ThresholdTriple& th) const;

private:
    double segment_entropy(int lo, int hi) const;  // inclusive bin range

    std::array<double, 257> mass_{};     // prefix sums of p
    std::array<double, 257> neg_plnp_{}; // prefix sums of -p ln p
    int segments_;
};

// Parameters for the parameterized entropy family. The paper-facing defaults:
// Renyi order 2, Tsallis order 2, Kapur order/type (0.5, 0.7).
struct EntropyFeatureParams {
    double renyi_alpha = 2.0;
    double tsallis_q = 2.0;
    double kapur_alpha = 0.5;
    double kapur_beta = 0.7;
};

// The seven scalar entropy features of a distribution.
struct EntropyFeatureSet {
    double kapur_ab = 0.0;  // (1/(b-a)) ln(sum p^a / sum p^b)
    double max_h = 0.0;     // ln(#nonzero bins)
    double renyi = 0.0;     // -ln sum p^2 at alpha=2
    double tsallis = 0.0;   // 1 - sum p^2 at q=2
    double shannon = 0.0;   // -sum p ln p
    double vajda = 0.0;     // sum p(1-p)
    double yager = 0.0;     // 1 - (sum |2p-1|)/256  (normalizer fixed at 256)

    std::array<double, 7> as_array() const {
        return {kapur_ab, max_h, renyi, tsallis, shannon, vajda, yager};
    }
};

// Accepts any number of bins; only the yager normalizer is pinned to 256, so
// appending zero-probability bins leaves the other six features unchanged.
EntropyFeatureSet entropy_features(std::span<const double> p,
                                   const EntropyFeatureParams& params = {});

EntropyFeatureSet entropy_features(const ProbabilityDistribution& prob,
                                   const EntropyFeatureParams& params = {});

}  // namespace ctmls
