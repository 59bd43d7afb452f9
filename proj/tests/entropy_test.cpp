#include <doctest.h>

#include <cmath>

#include "ctmls/entropy.hpp"
#include "ctmls/errors.hpp"
#include "ctmls/rng.hpp"
#include "test_util.hpp"

using namespace ctmls;

namespace {

ProbabilityDistribution uniform_dist(int levels) {
    ProbabilityDistribution d;
    for (int i = 0; i < levels; ++i) d.p[i] = 1.0 / levels;
    return d;
}

ProbabilityDistribution random_dist(std::uint64_t seed, int levels = 256) {
    Rng rng(seed);
    ProbabilityDistribution d;
    double sum = 0.0;
    for (int i = 0; i < levels; ++i) {
        d.p[i] = rng.uniform();
        sum += d.p[i];
    }
    for (int i = 0; i < levels; ++i) d.p[i] /= sum;
    return d;
}

// Straight-line transcription of the segment-entropy sum, kept independent of
// the library implementation on purpose.
double kapur_reference(const ProbabilityDistribution& prob, int t1, int t2, int t3,
                       int segments = 4) {
    const int lo[4] = {0, t1, t2, t3};
    const int hi[4] = {t1 - 1, t2 - 1, t3 - 1, 255};
    double total = 0.0;
    for (int k = 0; k < segments; ++k) {
        double omega = 0.0;
        for (int i = lo[k]; i <= hi[k]; ++i) omega += prob.p[i];
        if (omega == 0.0) continue;
        double e = 0.0;
        for (int i = lo[k]; i <= hi[k]; ++i) {
            if (prob.p[i] == 0.0) continue;
            const double q = prob.p[i] / omega;
            e -= q * std::log(q);
        }
        total += e;
    }
    return total;
}

}  // namespace

TEST_CASE("probabilities normalizes counts") {
    Histogram h;
    h.counts[0] = 2;
    h.counts[255] = 2;
    h.total = 4;
    const ProbabilityDistribution d = probabilities(h);
    CHECK(d.p[0] == doctest::Approx(0.5));
    CHECK(d.p[255] == doctest::Approx(0.5));

    Histogram u;
    for (auto& c : u.counts) c = 3;
    u.total = 3 * 256;
    const ProbabilityDistribution du = probabilities(u);
    for (int i = 0; i < 256; ++i) CHECK(du.p[i] == doctest::Approx(1.0 / 256));

    Histogram empty;
    CHECK_THROWS_AS(probabilities(empty), DataError);
}

TEST_CASE("threshold triple invariants") {
    CHECK_THROWS_AS(make_triple(0, 1, 2), DataError);
    CHECK_THROWS_AS(make_triple(5, 5, 9), DataError);
    CHECK_THROWS_AS(make_triple(5, 9, 256), DataError);
    const ThresholdTriple t = make_triple(1, 2, 255);
    CHECK(t.t1 == 1);
}

TEST_CASE("kapur objective: uniform distribution at (64,128,192) gives 4 ln 64") {
    const ProbabilityDistribution d = uniform_dist(256);
    const double score = kapur_objective(d, make_triple(64, 128, 192));
    CHECK(score == doctest::Approx(4.0 * std::log(64.0)).epsilon(1e-12));
    CHECK(score == doctest::Approx(16.63553).epsilon(1e-5));
}

TEST_CASE("kapur objective: point mass scores zero") {
    ProbabilityDistribution d;
    d.p[100] = 1.0;
    CHECK(kapur_objective(d, make_triple(50, 150, 200)) == 0.0);
}

TEST_CASE("kapur objective matches the straight-line oracle to 1e-12") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const ProbabilityDistribution d = random_dist(seed);
        Rng rng(seed ^ 0xabcULL);
        const int t1 = rng.uniform_int(1, 100);
        const int t2 = rng.uniform_int(t1 + 1, 180);
        const int t3 = rng.uniform_int(t2 + 1, 255);
        const double expected = kapur_reference(d, t1, t2, t3);
        CHECK(kapur_objective(d, make_triple(t1, t2, t3)) ==
              doctest::Approx(expected).epsilon(1e-12));
        const KapurEvaluator eval(d);
        CHECK(eval(ThresholdTriple{t1, t2, t3}) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("kapur objective generalizes to other threshold counts") {
    const ProbabilityDistribution d = uniform_dist(256);
    // bi-level: [0,127],[128,255] -> 2 ln 128
    const int one[1] = {128};
    CHECK(kapur_objective(d, std::span<const int>(one, 1), 2) ==
          doctest::Approx(2.0 * std::log(128.0)).epsilon(1e-12));
    // seven thresholds, eight equal segments -> 8 ln 32
    const int seven[7] = {32, 64, 96, 128, 160, 192, 224};
    CHECK(kapur_objective(d, std::span<const int>(seven, 7), 8) ==
          doctest::Approx(8.0 * std::log(32.0)).epsilon(1e-12));
    CHECK_THROWS_AS(kapur_objective(d, std::span<const int>(seven, 7), 9), DataError);
}

TEST_CASE("kapur objective with 3 segments ignores the top segment") {
    const ProbabilityDistribution d = random_dist(5);
    const ThresholdTriple th = make_triple(64, 128, 192);
    CHECK(kapur_objective(d, th, 3) == doctest::Approx(kapur_reference(d, 64, 128, 192, 3)));
    CHECK(kapur_objective(d, th, 3) < kapur_objective(d, th, 4));
}

TEST_CASE("uniform 32-level distribution: equally spaced thresholds maximize") {
    const ProbabilityDistribution d = uniform_dist(32);
    const KapurEvaluator eval(d);
    double best = -1.0;
    ThresholdTriple best_th{1, 2, 3};
    for (int t1 = 1; t1 <= 29; ++t1)
        for (int t2 = t1 + 1; t2 <= 30; ++t2)
            for (int t3 = t2 + 1; t3 <= 31; ++t3) {
                const double s = eval(ThresholdTriple{t1, t2, t3});
                if (s > best) {
                    best = s;
                    best_th = ThresholdTriple{t1, t2, t3};
                }
            }
    CHECK(best_th == ThresholdTriple{8, 16, 24});
    CHECK(best == doctest::Approx(4.0 * std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("entropy features at the uniform distribution") {
    const EntropyFeatureSet f = entropy_features(uniform_dist(256));
    CHECK(f.shannon == doctest::Approx(std::log(256.0)).epsilon(1e-12));
    CHECK(f.shannon == doctest::Approx(5.5452).epsilon(1e-4));
    CHECK(f.max_h == doctest::Approx(std::log(256.0)).epsilon(1e-12));
    CHECK(f.tsallis == doctest::Approx(1.0 - 1.0 / 256).epsilon(1e-12));
    CHECK(f.renyi == doctest::Approx(std::log(256.0)).epsilon(1e-12));
    CHECK(f.kapur_ab == doctest::Approx(std::log(256.0)).epsilon(1e-12));
}

TEST_CASE("entropy features at a point mass are zero") {
    ProbabilityDistribution d;
    d.p[42] = 1.0;
    const EntropyFeatureSet f = entropy_features(d);
    CHECK(f.shannon == 0.0);
    CHECK(f.renyi == doctest::Approx(0.0));
    CHECK(f.tsallis == doctest::Approx(0.0));
    CHECK(f.vajda == doctest::Approx(0.0));
    CHECK(f.max_h == 0.0);
    CHECK(f.yager == doctest::Approx(0.0));
}

TEST_CASE("entropy features on the two-point distribution") {
    const double two[2] = {0.5, 0.5};
    const EntropyFeatureSet f = entropy_features(std::span<const double>(two, 2));
    CHECK(f.shannon == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(f.renyi == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(f.tsallis == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("entropy feature bounds on random distributions") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const int levels = 2 + static_cast<int>(seed * 10 % 255);
        const ProbabilityDistribution d = random_dist(seed, levels);
        const EntropyFeatureSet f = entropy_features(d);
        CHECK(f.shannon >= 0.0);
        CHECK(f.shannon <= std::log(static_cast<double>(levels)) + 1e-12);
        CHECK(f.renyi <= f.shannon + 1e-12);  // Renyi order 2 never exceeds Shannon
        CHECK(f.vajda >= 0.0);
        CHECK(f.vajda < 1.0);
        CHECK(f.yager >= 0.0);
        CHECK(f.yager <= 1.0);
        CHECK(std::isfinite(f.kapur_ab));
        CHECK(std::isfinite(f.tsallis));
    }
}

TEST_CASE("appending a zero bin changes only yager") {
    Rng rng(9);
    std::vector<double> p(40);
    double sum = 0.0;
    for (double& v : p) {
        v = rng.uniform();
        sum += v;
    }
    for (double& v : p) v /= sum;

    const EntropyFeatureSet before = entropy_features(p);
    p.push_back(0.0);
    const EntropyFeatureSet after = entropy_features(p);
    CHECK(after.shannon == before.shannon);
    CHECK(after.renyi == before.renyi);
    CHECK(after.tsallis == before.tsallis);
    CHECK(after.kapur_ab == before.kapur_ab);
    CHECK(after.max_h == before.max_h);
    CHECK(after.vajda == before.vajda);
    CHECK(after.yager != before.yager);  // normalizer fixed at 256
    CHECK(after.yager == doctest::Approx(before.yager - 1.0 / 256).epsilon(1e-12));
}
