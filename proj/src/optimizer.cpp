#include "ctmls/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctmls/errors.hpp"
#include "ctmls/rng.hpp"

namespace ctmls {

LorenzState lorenz_derivative(const LorenzState& s) {
    constexpr double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
    return {sigma * (s.y - s.x), s.x * (rho - s.z) - s.y, s.x * s.y - beta * s.z};
}

namespace {

LorenzState rk4_step(const LorenzState& s, double dt) {
    auto add = [](const LorenzState& a, const LorenzState& b, double h) {
        return LorenzState{a.x + h * b.x, a.y + h * b.y, a.z + h * b.z};
    };
    const LorenzState k1 = lorenz_derivative(s);
    const LorenzState k2 = lorenz_derivative(add(s, k1, dt / 2));
    const LorenzState k3 = lorenz_derivative(add(s, k2, dt / 2));
    const LorenzState k4 = lorenz_derivative(add(s, k3, dt));
    return LorenzState{s.x + dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
                       s.y + dt / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
                       s.z + dt / 6 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z)};
}

constexpr int kBurnIn = 100;
constexpr int kReferenceSteps = 20000;

// Coordinate ranges of a long reference orbit started at exactly (1,1,1);
// used as the normalization frame for every seeded orbit at the same dt.
void reference_bounds(double dt, LorenzState& lo, LorenzState& hi) {
    LorenzState s{1.0, 1.0, 1.0};
    for (int i = 0; i < kBurnIn; ++i) s = rk4_step(s, dt);
    lo = hi = s;
    for (int i = 0; i < kReferenceSteps; ++i) {
        s = rk4_step(s, dt);
        lo.x = std::min(lo.x, s.x), hi.x = std::max(hi.x, s.x);
        lo.y = std::min(lo.y, s.y), hi.y = std::max(hi.y, s.y);
        lo.z = std::min(lo.z, s.z), hi.z = std::max(hi.z, s.z);
    }
}

double to_unit(double v, double lo, double hi) {
    const double u = hi > lo ? 2.0 * (v - lo) / (hi - lo) - 1.0 : 0.0;
    return std::clamp(u, -1.0, 1.0);
}

}  // namespace

LorenzStream::LorenzStream(std::uint64_t seed, double dt) : dt_(dt) {
    if (dt <= 0.0) throw ConfigError("lorenz dt must be positive");
    reference_bounds(dt, lo_, hi_);
    Rng rng(seed);
    s_ = LorenzState{1.0 + rng.uniform(-0.1, 0.1), 1.0 + rng.uniform(-0.1, 0.1),
                     1.0 + rng.uniform(-0.1, 0.1)};
    for (int i = 0; i < kBurnIn; ++i) s_ = rk4_step(s_, dt_);
}

LorenzState LorenzStream::next() {
    s_ = rk4_step(s_, dt_);
    return LorenzState{to_unit(s_.x, lo_.x, hi_.x), to_unit(s_.y, lo_.y, hi_.y),
                       to_unit(s_.z, lo_.z, hi_.z)};
}

std::vector<LorenzState> lorenz_sequence(std::uint64_t seed, int n, double dt) {
    if (n < 1) throw ConfigError("lorenz sequence length must be >= 1");
    LorenzStream stream(seed, dt);
    std::vector<LorenzState> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(stream.next());
    return out;
}

void CbaConfig::validate() const {
    if (n_bats < 1) throw ConfigError("n_bats must be >= 1");
    if (dim != 3) throw ConfigError("threshold search dimension must be 3");
    if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (!(f_min < f_max)) throw ConfigError("f_min must be < f_max");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
    if (sigma0 <= 0.0) throw ConfigError("sigma0 must be positive");
    if (freq_step < 0.0) throw ConfigError("freq_step must be >= 0");
    if (lorenz_dt <= 0.0) throw ConfigError("lorenz_dt must be positive");
}

namespace {

// Clamp/sort/round a continuous position into a valid strictly increasing
// integer triple.
ThresholdTriple discretize(const std::array<double, 3>& pos) {
    std::array<double, 3> s = pos;
    std::sort(s.begin(), s.end());
    int t1 = static_cast<int>(std::lround(std::clamp(s[0], 1.0, 255.0)));
    int t2 = static_cast<int>(std::lround(std::clamp(s[1], 1.0, 255.0)));
    int t3 = static_cast<int>(std::lround(std::clamp(s[2], 1.0, 255.0)));
    t1 = std::clamp(t1, 1, 253);
    t2 = std::clamp(t2, t1 + 1, 254);
    t3 = std::clamp(t3, t2 + 1, 255);
    return ThresholdTriple{t1, t2, t3};
}

struct BatState {
    std::array<double, 3> position{};  // flying position, Eqs 6-7
    std::array<double, 3> velocity{};
    std::array<double, 3> best_position{};  // bat's best-known solution
    double best_score = -std::numeric_limits<double>::infinity();
    double loudness = 1.0;
    Rng rng;
    LorenzStream chaos;

    BatState(std::uint64_t rng_seed, std::uint64_t chaos_seed, double dt)
        : rng(rng_seed), chaos(chaos_seed, dt) {}
};

double checked_eval(const TripleObjective& objective, const ThresholdTriple& th) {
    const double v = objective(th);
    if (std::isnan(v))
        throw DataError("objective returned NaN at thresholds (" + std::to_string(th.t1) + "," +
                        std::to_string(th.t2) + "," + std::to_string(th.t3) + ")");
    return v;
}

}  // namespace

OptResult cba_optimize(const TripleObjective& objective, const CbaConfig& cfg) {
    cfg.validate();

    std::vector<BatState> bats;
    bats.reserve(static_cast<std::size_t>(cfg.n_bats));
    for (int j = 0; j < cfg.n_bats; ++j) {
        bats.emplace_back(derive_seed(cfg.seed, 2 * j), derive_seed(cfg.seed, 2 * j + 1),
                          cfg.lorenz_dt);
        BatState& b = bats.back();
        b.loudness = cfg.sigma0;
        for (double& c : b.position) c = b.rng.uniform(1.0, 255.0);
        b.best_position = b.position;
        b.best_score = checked_eval(objective, discretize(b.position));
    }

    std::array<double, 3> best_pos = bats[0].best_position;
    double best_score = bats[0].best_score;
    for (const BatState& b : bats) {
        if (b.best_score > best_score) {
            best_score = b.best_score;
            best_pos = b.best_position;
        }
    }
    ThresholdTriple best_triple = discretize(best_pos);

    OptResult result;
    result.trace.reserve(static_cast<std::size_t>(cfg.max_iter));

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        // All bats see the global best from the end of the previous iteration,
        // so per-bat work is order-independent.
        const std::array<double, 3> gbest = best_pos;
        for (BatState& b : bats) {
            double f = cfg.f_min + (cfg.f_max - cfg.f_min) * b.rng.uniform();
            if (cfg.freq_step > 0.0) f = std::round(f / cfg.freq_step) * cfg.freq_step;
            const double dir = cfg.velocity_sign == VelocitySign::paper_literal ? 1.0 : -1.0;
            for (int d = 0; d < 3; ++d) {
                b.velocity[d] += dir * (b.position[d] - gbest[d]) * f;
                b.position[d] = std::clamp(b.position[d] + b.velocity[d], 1.0, 255.0);
            }
            const double flight_score = checked_eval(objective, discretize(b.position));
            if (flight_score > b.best_score) {
                b.best_score = flight_score;
                b.best_position = b.position;
            }

            // Chaotic local walk around the bat's best-known solution, kept
            // only when it improves that bat (an improvement anchored at the
            // flying position would be overwritten by the next Eq 7 flight).
            const LorenzState psi = b.chaos.next();
            std::array<double, 3> cand = b.best_position;
            cand[0] = std::clamp(cand[0] + b.loudness * psi.x, 1.0, 255.0);
            cand[1] = std::clamp(cand[1] + b.loudness * psi.y, 1.0, 255.0);
            cand[2] = std::clamp(cand[2] + b.loudness * psi.z, 1.0, 255.0);
            const double cand_score = checked_eval(objective, discretize(cand));
            if (cand_score > b.best_score) {
                b.best_position = cand;
                b.best_score = cand_score;
                b.loudness *= cfg.alpha;
            }
        }
        for (const BatState& b : bats) {
            if (b.best_score > best_score) {
                best_score = b.best_score;
                best_pos = b.best_position;
                best_triple = discretize(b.best_position);
            }
        }
        result.trace.push_back(best_score);
    }

    result.best_thresholds = best_triple;
    result.best_score = checked_eval(objective, best_triple);
    return result;
}

std::pair<ThresholdTriple, double> exhaustive_tri_threshold(const ProbabilityDistribution& prob,
                                                            int segments) {
    const KapurEvaluator eval(prob, segments);
    ThresholdTriple best{1, 2, 3};
    double best_score = -std::numeric_limits<double>::infinity();
    for (int t1 = 1; t1 <= 253; ++t1) {
        for (int t2 = t1 + 1; t2 <= 254; ++t2) {
            for (int t3 = t2 + 1; t3 <= 255; ++t3) {
                const ThresholdTriple th{t1, t2, t3};
                const double s = eval(th);
                if (s > best_score) {
                    best_score = s;
                    best = th;
                }
            }
        }
    }
    return {best, kapur_objective(prob, best, segments)};
}

}  // namespace ctmls
