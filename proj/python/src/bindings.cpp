#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ctmls/classifiers.hpp"
#include "ctmls/entropy.hpp"
#include "ctmls/errors.hpp"
#include "ctmls/evaluation.hpp"
#include "ctmls/features.hpp"
#include "ctmls/image.hpp"
#include "ctmls/optimizer.hpp"
#include "ctmls/pipeline.hpp"
#include "ctmls/segmentation.hpp"
#include "ctmls/selection.hpp"
#include "ctmls/synth.hpp"

namespace py = pybind11;
using namespace ctmls;

namespace {

GrayImage image_from_array(const py::array_t<std::uint8_t, py::array::c_style>& arr) {
    if (arr.ndim() != 2) throw DataError("image array must be 2-D (height, width)");
    const int h = static_cast<int>(arr.shape(0));
    const int w = static_cast<int>(arr.shape(1));
    std::vector<std::uint8_t> pixels(arr.data(), arr.data() + arr.size());
    return make_image(w, h, std::move(pixels));
}

py::array_t<std::uint8_t> array_from_image(const GrayImage& img) {
    py::array_t<std::uint8_t> arr({img.height, img.width});
    std::copy(img.pixels.begin(), img.pixels.end(), arr.mutable_data());
    return arr;
}

ProbabilityDistribution distribution_from_array(const py::array_t<double>& arr) {
    if (arr.ndim() != 1 || arr.shape(0) != 256)
        throw DataError("probability array must have 256 entries");
    ProbabilityDistribution d;
    std::copy(arr.data(), arr.data() + 256, d.p.begin());
    return d;
}

std::vector<std::vector<double>> matrix_from_array(const py::array_t<double, py::array::c_style>& arr) {
    if (arr.ndim() != 2) throw DataError("feature matrix must be 2-D");
    std::vector<std::vector<double>> x(arr.shape(0), std::vector<double>(arr.shape(1)));
    for (py::ssize_t i = 0; i < arr.shape(0); ++i)
        for (py::ssize_t j = 0; j < arr.shape(1); ++j) x[i][j] = arr.at(i, j);
    return x;
}

py::dict metric_dict(const MetricSet& m) {
    py::dict d;
    d["fnr"] = m.fnr;
    d["fpr"] = m.fpr;
    d["acc"] = m.acc;
    d["pre"] = m.pre;
    d["sen"] = m.sen;
    d["spe"] = m.spe;
    d["npv"] = m.npv;
    d["f1s"] = m.f1s;
    d["degenerate"] = m.degenerate;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kapur thresholding via the chaotic bat algorithm, texture features, and "
              "classical two-class classifiers for CT slices";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

    // imageio
    m.def("load_image", [](const std::filesystem::path& p) { return array_from_image(load_image(p)); },
          py::arg("path"), "Load a P5 PGM or 8-bit grayscale PNG as a (h, w) uint8 array.");
    m.def("save_pgm",
          [](const py::array_t<std::uint8_t, py::array::c_style>& img,
             const std::filesystem::path& p) { save_pgm(image_from_array(img), p); },
          py::arg("image"), py::arg("path"));
    m.def("resize_bilinear",
          [](const py::array_t<std::uint8_t, py::array::c_style>& img, int width, int height) {
              return array_from_image(resize_bilinear(image_from_array(img), width, height));
          },
          py::arg("image"), py::arg("width"), py::arg("height"));
    m.def("histogram",
          [](const py::array_t<std::uint8_t, py::array::c_style>& img) {
              const Histogram h = histogram(image_from_array(img));
              py::array_t<std::uint64_t> out(256);
              std::copy(h.counts.begin(), h.counts.end(), out.mutable_data());
              return out;
          },
          py::arg("image"));
    m.def("synth_dataset",
          [](std::uint64_t seed, int n_per_class, const std::filesystem::path& out_dir) {
              const DatasetManifest man = synth_dataset(seed, n_per_class, out_dir);
              std::vector<std::pair<std::string, std::string>> out;
              for (const auto& r : man.records) out.emplace_back(r.path.string(), r.label);
              return out;
          },
          py::arg("seed"), py::arg("n_per_class"), py::arg("out_dir"));

    // entropy / thresholds
    m.def("probabilities",
          [](const py::array_t<std::uint8_t, py::array::c_style>& img) {
              const ProbabilityDistribution d = probabilities(histogram(image_from_array(img)));
              py::array_t<double> out(256);
              std::copy(d.p.begin(), d.p.end(), out.mutable_data());
              return out;
          },
          py::arg("image"));
    m.def("kapur_objective",
          [](const py::array_t<double>& p, int t1, int t2, int t3, int segments) {
              return kapur_objective(distribution_from_array(p), make_triple(t1, t2, t3), segments);
          },
          py::arg("p"), py::arg("t1"), py::arg("t2"), py::arg("t3"), py::arg("segments") = 4);
    m.def("entropy_features",
          [](const py::array_t<double>& p) {
              const auto span = std::span<const double>(p.data(), static_cast<std::size_t>(p.size()));
              const EntropyFeatureSet f = entropy_features(span);
              py::dict d;
              d["kapur_ab"] = f.kapur_ab;
              d["max_h"] = f.max_h;
              d["renyi"] = f.renyi;
              d["tsallis"] = f.tsallis;
              d["shannon"] = f.shannon;
              d["vajda"] = f.vajda;
              d["yager"] = f.yager;
              return d;
          },
          py::arg("p"));
    m.def("lorenz_sequence",
          [](std::uint64_t seed, int n, double dt) {
              const std::vector<LorenzState> seq = lorenz_sequence(seed, n, dt);
              py::array_t<double> out({n, 3});
              for (int i = 0; i < n; ++i) {
                  out.mutable_at(i, 0) = seq[i].x;
                  out.mutable_at(i, 1) = seq[i].y;
                  out.mutable_at(i, 2) = seq[i].z;
              }
              return out;
          },
          py::arg("seed"), py::arg("n"), py::arg("dt") = 0.01);
    m.def("cba_optimize",
          [](const py::array_t<double>& p, int segments, int n_bats, int max_iter, double f_min,
             double f_max, double freq_step, double alpha, double sigma0, std::uint64_t seed,
             double lorenz_dt) {
              const ProbabilityDistribution prob = distribution_from_array(p);
              const KapurEvaluator eval(prob, segments);
              CbaConfig cfg;
              cfg.n_bats = n_bats;
              cfg.max_iter = max_iter;
              cfg.f_min = f_min;
              cfg.f_max = f_max;
              cfg.freq_step = freq_step;
              cfg.alpha = alpha;
              cfg.sigma0 = sigma0;
              cfg.seed = seed;
              cfg.lorenz_dt = lorenz_dt;
              const OptResult r =
                  cba_optimize([&eval](const ThresholdTriple& t) { return eval(t); }, cfg);
              py::dict d;
              d["thresholds"] = py::make_tuple(r.best_thresholds.t1, r.best_thresholds.t2,
                                               r.best_thresholds.t3);
              d["score"] = r.best_score;
              d["trace"] = r.trace;
              return d;
          },
          py::arg("p"), py::arg("segments") = 4, py::arg("n_bats") = 25,
          py::arg("max_iter") = 3000, py::arg("f_min") = 0.0, py::arg("f_max") = 50.0,
          py::arg("freq_step") = 0.05, py::arg("alpha") = 0.9, py::arg("sigma0") = 127.0,
          py::arg("seed") = 1, py::arg("lorenz_dt") = 0.01);
    m.def("exhaustive_tri_threshold",
          [](const py::array_t<double>& p, int segments) {
              const auto [th, score] = exhaustive_tri_threshold(distribution_from_array(p), segments);
              return py::make_tuple(py::make_tuple(th.t1, th.t2, th.t3), score);
          },
          py::arg("p"), py::arg("segments") = 4);

    // segmentation
    m.def("apply_trilevel",
          [](const py::array_t<std::uint8_t, py::array::c_style>& img, int t1, int t2, int t3) {
              return array_from_image(
                  apply_trilevel(image_from_array(img), make_triple(t1, t2, t3)).image);
          },
          py::arg("image"), py::arg("t1"), py::arg("t2"), py::arg("t3"));
    m.def("threshold_filter",
          [](const py::array_t<std::uint8_t, py::array::c_style>& img, int th) {
              const RoiPair pair = threshold_filter(image_from_array(img), th);
              return py::make_tuple(array_from_image(pair.roi), array_from_image(pair.artifact));
          },
          py::arg("image"), py::arg("th") = 179);

    // features
    m.def("dwt_features",
          [](const py::array_t<std::uint8_t, py::array::c_style>& img) {
              return dwt_features(image_from_array(img));
          },
          py::arg("image"));
    m.def("glcm_features",
          [](const py::array_t<std::uint8_t, py::array::c_style>& img, int levels) {
              FeatureConfig cfg;
              cfg.glcm_levels = levels;
              return glcm_features(image_from_array(img), cfg);
          },
          py::arg("image"), py::arg("levels") = 8);
    m.def("hu_features",
          [](const py::array_t<std::uint8_t, py::array::c_style>& img) {
              return hu_features(image_from_array(img));
          },
          py::arg("image"));
    m.def("extract_raw",
          [](const py::array_t<std::uint8_t, py::array::c_style>& img) {
              return extract_raw(image_from_array(img), SourceTag::original).values;
          },
          py::arg("image"), "The raw 74-dim feature vector, ordered as feature_names().");
    m.def("feature_names", [] { return raw_feature_names(); });

    // selection / statistics
    m.def("welch_t",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              const WelchResult r = welch_t(a, b);
              return py::make_tuple(r.t, r.p, r.df);
          },
          py::arg("a"), py::arg("b"), "Returns (t, two_sided_p, welch_df).");

    // evaluation
    m.def("metrics",
          [](long tp, long fn, long fp, long tn) {
              return metric_dict(metrics(ConfusionMatrix{tp, fn, fp, tn}));
          },
          py::arg("tp"), py::arg("fn"), py::arg("fp"), py::arg("tn"));
    m.def("stratified_kfold", &stratified_kfold, py::arg("labels"), py::arg("k"), py::arg("seed"));

    // classifiers
    py::class_<TrainedModel>(m, "Model")
        .def_property_readonly("algorithm",
                               [](const TrainedModel& mm) { return to_string(mm.algorithm); })
        .def_property_readonly("n_features", [](const TrainedModel& mm) { return mm.n_features; })
        .def("predict",
             [](const TrainedModel& mm, const py::array_t<double, py::array::c_style>& x) {
                 const auto rows = matrix_from_array(x);
                 std::vector<std::string> labels;
                 std::vector<double> scores;
                 for (const auto& row : rows) {
                     const Prediction p = predict(mm, row);
                     labels.push_back(p.label);
                     scores.push_back(p.score);
                 }
                 return py::make_tuple(labels, scores);
             },
             py::arg("x"), "Predict rows of a 2-D matrix; returns (labels, scores).")
        .def("save", [](const TrainedModel& mm, const std::filesystem::path& p) { save_model(mm, p); },
             py::arg("path"));
    m.def("fit",
          [](const std::string& algorithm, const py::array_t<double, py::array::c_style>& x,
             const std::vector<int>& y, std::uint64_t seed) {
              return fit(algorithm_from_string(algorithm), matrix_from_array(x), y, Hyperparams{},
                         seed);
          },
          py::arg("algorithm"), py::arg("x"), py::arg("y"), py::arg("seed") = 1,
          "Train one of nb|knn|dt|rf|svm on rows of x with labels y (0=normal, 1=covid).");
    m.def("load_model", &load_model, py::arg("path"));
}
