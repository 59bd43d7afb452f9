#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ctmls {

enum class Algorithm { nb, knn, dt, rf, svm };

std::string to_string(Algorithm alg);
Algorithm algorithm_from_string(const std::string& s);

// All hyperparameters in one place; recorded in every report.
struct Hyperparams {
    int knn_k = 5;
    int dt_max_depth = 10;
    int dt_min_leaf = 2;
    int rf_trees = 100;
    int rf_max_depth = 10;
    int rf_min_leaf = 1;
    double svm_lambda = 1e-4;
    int svm_epochs = 200;
    double nb_var_floor = 1e-9;
};

// Per-feature z-score parameters estimated on training data only.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> stddev;  // floored at 1e-12
    bool active = false;

    static Normalizer fit(const std::vector<std::vector<double>>& x);
    std::vector<double> apply(std::span<const double> x) const;
};

// Axis-aligned binary tree node; feature < 0 marks a leaf.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double covid_fraction = 0.0;
};

struct Prediction {
    std::string label;  // "normal" or "covid"
    double score;       // log-odds (nb), vote fraction (knn/dt/rf), margin (svm)
};

// One trained two-class model. covid is the positive class throughout;
// label == covid exactly when score passes the algorithm's threshold
// (0 for nb/svm, 0.5 for the vote fractions).
struct TrainedModel {
    Algorithm algorithm = Algorithm::nb;
    Hyperparams hp;
    Normalizer normalizer;  // active for knn and svm only
    std::size_t n_features = 0;

    // nb
    std::array<double, 2> log_prior{};             // [normal, covid]
    std::array<std::vector<double>, 2> nb_mean;
    std::array<std::vector<double>, 2> nb_var;
    // knn
    std::vector<std::vector<double>> knn_x;        // normalized
    std::vector<int> knn_y;
    // dt
    std::vector<TreeNode> tree;
    // rf
    std::vector<std::vector<TreeNode>> forest;
    // svm
    std::vector<double> svm_w;
    double svm_b = 0.0;
    std::vector<double> svm_objective;  // per-epoch hinge+L2 of the iterate
};

// y holds 0 (normal) / 1 (covid); every class needs >= 2 samples.
// Deterministic for a fixed seed.
TrainedModel fit(Algorithm alg, const std::vector<std::vector<double>>& x,
                 const std::vector<int>& y, const Hyperparams& hp, std::uint64_t seed);

Prediction predict(const TrainedModel& model, std::span<const double> x);

// Versioned JSON, human-diffable.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace ctmls
