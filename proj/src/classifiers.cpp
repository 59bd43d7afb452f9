#include "ctmls/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "ctmls/errors.hpp"
#include "ctmls/manifest.hpp"
#include "ctmls/rng.hpp"

namespace ctmls {

std::string to_string(Algorithm alg) {
    switch (alg) {
        case Algorithm::nb: return "nb";
        case Algorithm::knn: return "knn";
        case Algorithm::dt: return "dt";
        case Algorithm::rf: return "rf";
        case Algorithm::svm: return "svm";
    }
    return "nb";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "nb") return Algorithm::nb;
    if (s == "knn") return Algorithm::knn;
    if (s == "dt") return Algorithm::dt;
    if (s == "rf") return Algorithm::rf;
    if (s == "svm") return Algorithm::svm;
    throw ConfigError("unknown algorithm '" + s + "' (expected nb|knn|dt|rf|svm)");
}

Normalizer Normalizer::fit(const std::vector<std::vector<double>>& x) {
    Normalizer n;
    n.active = true;
    const std::size_t d = x.front().size();
    const double count = static_cast<double>(x.size());
    n.mean.assign(d, 0.0);
    n.stddev.assign(d, 0.0);
    for (const auto& row : x)
        for (std::size_t j = 0; j < d; ++j) n.mean[j] += row[j];
    for (double& m : n.mean) m /= count;
    for (const auto& row : x)
        for (std::size_t j = 0; j < d; ++j) {
            const double dlt = row[j] - n.mean[j];
            n.stddev[j] += dlt * dlt;
        }
    for (double& s : n.stddev) s = std::max(std::sqrt(s / count), 1e-12);
    return n;
}

std::vector<double> Normalizer::apply(std::span<const double> x) const {
    std::vector<double> out(x.begin(), x.end());
    if (!active) return out;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (out[j] - mean[j]) / stddev[j];
    return out;
}

namespace {

void check_training_input(const std::vector<std::vector<double>>& x, const std::vector<int>& y) {
    if (x.empty() || x.size() != y.size())
        throw DataError("training matrix and labels must be non-empty and the same length");
    const std::size_t d = x.front().size();
    if (d == 0) throw DataError("training matrix has zero features");
    int per_class[2] = {0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].size() != d) throw DataError("ragged training matrix");
        if (y[i] != 0 && y[i] != 1) throw DataError("labels must be 0 (normal) or 1 (covid)");
        ++per_class[y[i]];
        for (double v : x[i])
            if (!std::isfinite(v)) throw DataError("training matrix contains a non-finite value");
    }
    if (per_class[0] < 2 || per_class[1] < 2)
        throw DataError("each class needs at least 2 training samples (got " +
                        std::to_string(per_class[0]) + " normal, " +
                        std::to_string(per_class[1]) + " covid)");
}

double gini(int pos, int total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(pos) / total;
    return 2.0 * p * (1.0 - p);
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

// Best axis-aligned split over the given candidate features; ties keep the
// first candidate in scan order.
SplitChoice best_split(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       const std::vector<std::size_t>& idx,
                       const std::vector<int>& features, int min_leaf) {
    SplitChoice best;
    const int n = static_cast<int>(idx.size());
    std::vector<std::pair<double, int>> col(idx.size());
    for (int f : features) {
        for (std::size_t k = 0; k < idx.size(); ++k)
            col[k] = {x[idx[k]][f], y[idx[k]]};
        std::sort(col.begin(), col.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        int total_pos = 0;
        for (const auto& [v, label] : col) total_pos += label;
        int left_pos = 0;
        for (int k = 0; k < n - 1; ++k) {
            left_pos += col[k].second;
            if (col[k].first == col[k + 1].first) continue;
            const int nl = k + 1, nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double impurity =
                (nl * gini(left_pos, nl) + nr * gini(total_pos - left_pos, nr)) / n;
            if (impurity < best.impurity - 1e-15) {
                best = {f, (col[k].first + col[k + 1].first) / 2.0, impurity};
            }
        }
    }
    return best;
}

int build_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
               std::vector<std::size_t> idx, int depth, int max_depth, int min_leaf,
               int features_per_split, Rng* rng, std::vector<TreeNode>& nodes) {
    int pos = 0;
    for (std::size_t i : idx) pos += y[i];
    const int node_id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{});
    nodes[node_id].covid_fraction = static_cast<double>(pos) / static_cast<double>(idx.size());

    const bool pure = pos == 0 || pos == static_cast<int>(idx.size());
    if (pure || depth >= max_depth || static_cast<int>(idx.size()) < 2 * min_leaf) return node_id;

    const int d = static_cast<int>(x.front().size());
    std::vector<int> features(d);
    std::iota(features.begin(), features.end(), 0);
    if (rng && features_per_split < d) {
        // partial Fisher-Yates: first `features_per_split` entries are the sample
        for (int i = 0; i < features_per_split; ++i) {
            const int j = i + static_cast<int>(rng->below(static_cast<std::uint64_t>(d - i)));
            std::swap(features[i], features[j]);
        }
        features.resize(features_per_split);
        std::sort(features.begin(), features.end());
    }

    const SplitChoice split = best_split(x, y, idx, features, min_leaf);
    if (split.feature < 0) return node_id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) (x[i][split.feature] <= split.threshold ? left : right).push_back(i);
    if (left.empty() || right.empty()) return node_id;

    nodes[node_id].feature = split.feature;
    nodes[node_id].threshold = split.threshold;
    const int l = build_tree(x, y, std::move(left), depth + 1, max_depth, min_leaf,
                             features_per_split, rng, nodes);
    const int r = build_tree(x, y, std::move(right), depth + 1, max_depth, min_leaf,
                             features_per_split, rng, nodes);
    nodes[node_id].left = l;
    nodes[node_id].right = r;
    return node_id;
}

double tree_score(const std::vector<TreeNode>& nodes, std::span<const double> x) {
    int cur = 0;
    while (nodes[cur].feature >= 0)
        cur = x[nodes[cur].feature] <= nodes[cur].threshold ? nodes[cur].left : nodes[cur].right;
    return nodes[cur].covid_fraction;
}

void fit_nb(TrainedModel& m, const std::vector<std::vector<double>>& x,
            const std::vector<int>& y) {
    const std::size_t d = x.front().size();
    std::array<int, 2> count{};
    for (int c = 0; c < 2; ++c) {
        m.nb_mean[c].assign(d, 0.0);
        m.nb_var[c].assign(d, 0.0);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        ++count[y[i]];
        for (std::size_t j = 0; j < d; ++j) m.nb_mean[y[i]][j] += x[i][j];
    }
    for (int c = 0; c < 2; ++c)
        for (double& v : m.nb_mean[c]) v /= count[c];
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double dlt = x[i][j] - m.nb_mean[y[i]][j];
            m.nb_var[y[i]][j] += dlt * dlt;
        }
    for (int c = 0; c < 2; ++c) {
        for (double& v : m.nb_var[c]) v = std::max(v / count[c], m.hp.nb_var_floor);
        m.log_prior[c] = std::log(static_cast<double>(count[c]) / static_cast<double>(x.size()));
    }
}

double nb_score(const TrainedModel& m, std::span<const double> x) {
    double ll[2] = {m.log_prior[0], m.log_prior[1]};
    for (int c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double v = m.nb_var[c][j];
            const double dlt = x[j] - m.nb_mean[c][j];
            ll[c] -= 0.5 * (std::log(2.0 * 3.14159265358979323846 * v) + dlt * dlt / v);
        }
    return ll[1] - ll[0];  // log-odds for covid
}

void fit_svm(TrainedModel& m, const std::vector<std::vector<double>>& x,
             const std::vector<int>& y, std::uint64_t seed) {
    const std::size_t n = x.size(), d = x.front().size();
    const double lambda = m.hp.svm_lambda;
    std::vector<double> w(d, 0.0), w_sum(d, 0.0);
    double b = 0.0, b_sum = 0.0;
    std::uint64_t steps = 0;
    Rng rng(derive_seed(seed, 0x53564dULL));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    m.svm_objective.clear();
    for (int epoch = 0; epoch < m.hp.svm_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            ++steps;
            const double eta = 1.0 / (1.0 + lambda * static_cast<double>(steps));
            const double yi = y[i] == 1 ? 1.0 : -1.0;
            double margin = b;
            for (std::size_t j = 0; j < d; ++j) margin += w[j] * x[i][j];
            const double shrink = 1.0 - eta * lambda;
            for (double& wj : w) wj *= shrink;
            if (yi * margin < 1.0) {
                for (std::size_t j = 0; j < d; ++j) w[j] += eta * yi * x[i][j];
                b += eta * yi;
            }
            for (std::size_t j = 0; j < d; ++j) w_sum[j] += w[j];
            b_sum += b;
        }
        double hinge = 0.0, norm_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double margin = b;
            for (std::size_t j = 0; j < d; ++j) margin += w[j] * x[i][j];
            const double yi = y[i] == 1 ? 1.0 : -1.0;
            hinge += std::max(0.0, 1.0 - yi * margin);
        }
        for (double wj : w) norm_sq += wj * wj;
        m.svm_objective.push_back(hinge / static_cast<double>(n) + 0.5 * lambda * norm_sq);
    }

    m.svm_w.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) m.svm_w[j] = w_sum[j] / static_cast<double>(steps);
    m.svm_b = b_sum / static_cast<double>(steps);
}

}  // namespace

TrainedModel fit(Algorithm alg, const std::vector<std::vector<double>>& x,
                 const std::vector<int>& y, const Hyperparams& hp, std::uint64_t seed) {
    check_training_input(x, y);
    TrainedModel m;
    m.algorithm = alg;
    m.hp = hp;
    m.n_features = x.front().size();

    switch (alg) {
        case Algorithm::nb:
            fit_nb(m, x, y);
            break;
        case Algorithm::knn: {
            if (hp.knn_k < 1) throw ConfigError("knn_k must be >= 1");
            m.normalizer = Normalizer::fit(x);
            m.knn_x.reserve(x.size());
            for (const auto& row : x) m.knn_x.push_back(m.normalizer.apply(row));
            m.knn_y = y;
            break;
        }
        case Algorithm::dt: {
            std::vector<std::size_t> idx(x.size());
            std::iota(idx.begin(), idx.end(), 0);
            build_tree(x, y, std::move(idx), 0, hp.dt_max_depth, hp.dt_min_leaf,
                       static_cast<int>(m.n_features), nullptr, m.tree);
            break;
        }
        case Algorithm::rf: {
            if (hp.rf_trees < 1) throw ConfigError("rf_trees must be >= 1");
            const int k = std::max(
                1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(m.n_features)))));
            m.forest.resize(hp.rf_trees);
            for (int t = 0; t < hp.rf_trees; ++t) {
                Rng rng(derive_seed(seed, 0x5246ULL * 1000 + t));
                std::vector<std::size_t> bootstrap(x.size());
                for (std::size_t& s : bootstrap) s = rng.below(x.size());
                std::sort(bootstrap.begin(), bootstrap.end());  // row-order independent given seed
                build_tree(x, y, std::move(bootstrap), 0, hp.rf_max_depth, hp.rf_min_leaf, k, &rng,
                           m.forest[t]);
            }
            break;
        }
        case Algorithm::svm: {
            m.normalizer = Normalizer::fit(x);
            std::vector<std::vector<double>> xn;
            xn.reserve(x.size());
            for (const auto& row : x) xn.push_back(m.normalizer.apply(row));
            fit_svm(m, xn, y, seed);
            break;
        }
    }
    return m;
}

Prediction predict(const TrainedModel& m, std::span<const double> x) {
    if (x.size() != m.n_features)
        throw DataError("feature vector has " + std::to_string(x.size()) +
                        " dims, model expects " + std::to_string(m.n_features));
    double score = 0.0;
    bool covid = false;
    switch (m.algorithm) {
        case Algorithm::nb:
            score = nb_score(m, x);
            covid = score >= 0.0;
            break;
        case Algorithm::knn: {
            const std::vector<double> q = m.normalizer.apply(x);
            std::vector<std::pair<double, std::size_t>> dist(m.knn_x.size());
            for (std::size_t i = 0; i < m.knn_x.size(); ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < q.size(); ++j) {
                    const double d = q[j] - m.knn_x[i][j];
                    s += d * d;
                }
                dist[i] = {s, i};
            }
            const std::size_t k = std::min<std::size_t>(m.hp.knn_k, dist.size());
            std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
            int votes = 0;
            for (std::size_t i = 0; i < k; ++i) votes += m.knn_y[dist[i].second];
            score = static_cast<double>(votes) / static_cast<double>(k);
            covid = score >= 0.5;
            break;
        }
        case Algorithm::dt:
            score = tree_score(m.tree, x);
            covid = score >= 0.5;
            break;
        case Algorithm::rf: {
            int votes = 0;
            for (const auto& tree : m.forest) votes += tree_score(tree, x) >= 0.5 ? 1 : 0;
            score = static_cast<double>(votes) / static_cast<double>(m.forest.size());
            covid = score >= 0.5;
            break;
        }
        case Algorithm::svm: {
            const std::vector<double> q = m.normalizer.apply(x);
            score = m.svm_b;
            for (std::size_t j = 0; j < q.size(); ++j) score += m.svm_w[j] * q[j];
            covid = score >= 0.0;
            break;
        }
    }
    return Prediction{covid ? kLabelCovid : kLabelNormal, score};
}

namespace {

using nlohmann::json;

json tree_to_json(const std::vector<TreeNode>& nodes) {
    json arr = json::array();
    for (const TreeNode& n : nodes)
        arr.push_back({{"f", n.feature},
                       {"t", n.threshold},
                       {"l", n.left},
                       {"r", n.right},
                       {"p", n.covid_fraction}});
    return arr;
}

std::vector<TreeNode> tree_from_json(const json& arr) {
    std::vector<TreeNode> nodes;
    for (const auto& n : arr)
        nodes.push_back({n.at("f").get<int>(), n.at("t").get<double>(), n.at("l").get<int>(),
                         n.at("r").get<int>(), n.at("p").get<double>()});
    return nodes;
}

json hp_to_json(const Hyperparams& hp) {
    return {{"knn_k", hp.knn_k},
            {"dt_max_depth", hp.dt_max_depth},
            {"dt_min_leaf", hp.dt_min_leaf},
            {"rf_trees", hp.rf_trees},
            {"rf_max_depth", hp.rf_max_depth},
            {"rf_min_leaf", hp.rf_min_leaf},
            {"svm_lambda", hp.svm_lambda},
            {"svm_epochs", hp.svm_epochs},
            {"nb_var_floor", hp.nb_var_floor}};
}

Hyperparams hp_from_json(const json& j) {
    Hyperparams hp;
    hp.knn_k = j.at("knn_k").get<int>();
    hp.dt_max_depth = j.at("dt_max_depth").get<int>();
    hp.dt_min_leaf = j.at("dt_min_leaf").get<int>();
    hp.rf_trees = j.at("rf_trees").get<int>();
    hp.rf_max_depth = j.at("rf_max_depth").get<int>();
    hp.rf_min_leaf = j.at("rf_min_leaf").get<int>();
    hp.svm_lambda = j.at("svm_lambda").get<double>();
    hp.svm_epochs = j.at("svm_epochs").get<int>();
    hp.nb_var_floor = j.at("nb_var_floor").get<double>();
    return hp;
}

}  // namespace

void save_model(const TrainedModel& m, const std::filesystem::path& path) {
    json j;
    j["format_version"] = 1;
    j["algorithm"] = to_string(m.algorithm);
    j["classes"] = {kLabelNormal, kLabelCovid};
    j["n_features"] = m.n_features;
    j["hyperparameters"] = hp_to_json(m.hp);
    j["normalizer"] = {{"active", m.normalizer.active},
                       {"mean", m.normalizer.mean},
                       {"stddev", m.normalizer.stddev}};
    switch (m.algorithm) {
        case Algorithm::nb:
            j["nb"] = {{"log_prior", m.log_prior},
                       {"mean", m.nb_mean},
                       {"var", m.nb_var}};
            break;
        case Algorithm::knn:
            j["knn"] = {{"x", m.knn_x}, {"y", m.knn_y}};
            break;
        case Algorithm::dt:
            j["dt"] = {{"nodes", tree_to_json(m.tree)}};
            break;
        case Algorithm::rf: {
            json trees = json::array();
            for (const auto& t : m.forest) trees.push_back(tree_to_json(t));
            j["rf"] = {{"trees", std::move(trees)}};
            break;
        }
        case Algorithm::svm:
            j["svm"] = {{"w", m.svm_w}, {"b", m.svm_b}};
            break;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("model file " + path.string() + " is not valid JSON: " + e.what());
    }
    if (j.value("format_version", 0) != 1)
        throw DataError("model file " + path.string() + ": unsupported format_version");

    TrainedModel m;
    m.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    m.n_features = j.at("n_features").get<std::size_t>();
    m.hp = hp_from_json(j.at("hyperparameters"));
    const json& nj = j.at("normalizer");
    m.normalizer.active = nj.at("active").get<bool>();
    m.normalizer.mean = nj.at("mean").get<std::vector<double>>();
    m.normalizer.stddev = nj.at("stddev").get<std::vector<double>>();
    switch (m.algorithm) {
        case Algorithm::nb: {
            const json& b = j.at("nb");
            m.log_prior = b.at("log_prior").get<std::array<double, 2>>();
            m.nb_mean = b.at("mean").get<std::array<std::vector<double>, 2>>();
            m.nb_var = b.at("var").get<std::array<std::vector<double>, 2>>();
            break;
        }
        case Algorithm::knn: {
            const json& b = j.at("knn");
            m.knn_x = b.at("x").get<std::vector<std::vector<double>>>();
            m.knn_y = b.at("y").get<std::vector<int>>();
            break;
        }
        case Algorithm::dt:
            m.tree = tree_from_json(j.at("dt").at("nodes"));
            break;
        case Algorithm::rf:
            for (const auto& t : j.at("rf").at("trees")) m.forest.push_back(tree_from_json(t));
            break;
        case Algorithm::svm: {
            const json& b = j.at("svm");
            m.svm_w = b.at("w").get<std::vector<double>>();
            m.svm_b = b.at("b").get<double>();
            break;
        }
    }
    return m;
}

}  // namespace ctmls
