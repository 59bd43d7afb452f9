#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ctmls/entropy.hpp"

namespace ctmls {

struct LorenzState {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// Right-hand side of the Lorenz system with s=10, r=28, b=8/3.
LorenzState lorenz_derivative(const LorenzState& s);

// Deterministic chaotic driver: RK4-integrates the Lorenz system from a
// seed-jittered start near (1,1,1), discards a 100-step burn-in, and emits n
// states affinely normalized into [-1,1]^3 (bounds taken from a reference
// orbit, then clamped).
std::vector<LorenzState> lorenz_sequence(std::uint64_t seed, int n, double dt);

// Streaming form used by the optimizer; same output as lorenz_sequence.
class LorenzStream {
public:
    LorenzStream(std::uint64_t seed, double dt);
    LorenzState next();

private:
    LorenzState s_;
    double dt_;
    LorenzState lo_, hi_;  // reference-orbit bounds for normalization
};

enum class VelocitySign {
    away_from_best,  // v += (p - G_best) f
    toward_best,     // v += (G_best - p) f, the conventional attraction form
};

struct CbaConfig {
    int n_bats = 25;
    int dim = 3;
    int max_iter = 3000;
    double f_min = 0.0;
    double f_max = 50.0;
    double freq_step = 0.05;  // frequency grid; 0 disables quantization
    double alpha = 0.9;       // loudness decay on accepted local moves
    double sigma0 = 127.0;    // initial loudness: half the threshold range
    std::uint64_t seed = 1;
    double lorenz_dt = 0.01;
    VelocitySign velocity_sign = VelocitySign::away_from_best;

    void validate() const;
};

struct OptResult {
    ThresholdTriple best_thresholds;
    double best_score = 0.0;
    std::vector<double> trace;  // best-ever score per iteration, non-decreasing
};

using TripleObjective = std::function<double(const ThresholdTriple&)>;

// Chaotic bat search over integer threshold triples: velocity/position flight
// toward (or per the printed equations, away from) the global best with
// randomized quantized frequency, plus a loudness-scaled chaotic local walk
// accepted greedily per bat. Positions live in [1,255]^3 and are
// clamp/sort/rounded into a valid ThresholdTriple for every evaluation.
// Deterministic given cfg.seed; per-bat random and chaotic streams.
OptResult cba_optimize(const TripleObjective& objective, const CbaConfig& cfg);

// Evaluates every admissible triple (~2.7M) via prefix sums and returns the
// argmax, ties broken by lexicographically smallest triple. The returned
// score is re-evaluated with kapur_objective at the winning triple.
std::pair<ThresholdTriple, double> exhaustive_tri_threshold(const ProbabilityDistribution& prob,
                                                            int segments = 4);

}  // namespace ctmls
