#include <doctest.h>

#include <cmath>

#include "ctmls/errors.hpp"
#include "ctmls/features.hpp"
#include "test_util.hpp"

using namespace ctmls;

namespace {

GrayImage rotate90(const GrayImage& img) {
    GrayImage out = make_image(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) out.at(img.height - 1 - y, x) = img.at(x, y);
    return out;
}

double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-30});
    return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("haar bands of a constant image") {
    const std::uint8_t c = 93;
    const GrayImage img = make_image(16, 16, c);
    const auto bands = haar_decompose2(img);
    // orthonormal scaling gain: 2 per level on the LL path
    for (double v : bands[0].v) CHECK(v == doctest::Approx(2.0 * c).epsilon(1e-12));
    for (double v : bands[4].v) CHECK(v == doctest::Approx(4.0 * c).epsilon(1e-12));
    for (int b : {1, 2, 3, 5, 6, 7})
        for (double v : bands[b].v) CHECK(v == doctest::Approx(0.0));

    const std::vector<double> f = dwt_features(img);
    REQUIRE(f.size() == 40);
    CHECK(f[0] == doctest::Approx(2.0 * c));   // LL1 mean
    CHECK(f[20] == doctest::Approx(4.0 * c));  // LL2 mean
    for (int band : {1, 2, 3}) {
        CHECK(f[band * 5 + 0] == doctest::Approx(0.0));  // detail mean
        CHECK(f[band * 5 + 2] == doctest::Approx(0.0));  // detail energy
    }
}

TEST_CASE("haar level-1 transform satisfies Parseval") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const GrayImage img = test::random_image(32, 24, seed);
        double pixel_energy = 0.0;
        for (auto p : img.pixels) pixel_energy += static_cast<double>(p) * p;

        const auto bands = haar_decompose2(img);
        double coeff_energy = 0.0;
        for (int b = 0; b < 4; ++b)
            for (double v : bands[b].v) coeff_energy += v * v;
        CHECK(rel_diff(pixel_energy, coeff_energy) < 1e-6);
    }
}

TEST_CASE("haar on a 4x4 checkerboard concentrates detail in HH1") {
    GrayImage img = make_image(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) img.at(x, y) = ((x + y) % 2) ? 255 : 0;
    const auto bands = haar_decompose2(img);
    for (double v : bands[0].v) CHECK(v == doctest::Approx(255.0));  // LL1 constant
    for (double v : bands[1].v) CHECK(v == doctest::Approx(0.0));
    for (double v : bands[2].v) CHECK(v == doctest::Approx(0.0));
    double hh_energy = 0.0;
    for (double v : bands[3].v) hh_energy += v * v;
    CHECK(hh_energy > 0.0);
}

TEST_CASE("haar rejects dimensions that do not halve twice") {
    CHECK_THROWS_AS(dwt_features(make_image(6, 8, 0)), DataError);
    CHECK_THROWS_AS(dwt_features(make_image(8, 5, 0)), DataError);
}

TEST_CASE("glcm of a constant image") {
    const GrayImage img = make_image(8, 8, 200);
    const std::vector<double> f = glcm_features(img);
    REQUIRE(f.size() == 18);
    CHECK(f[0] == doctest::Approx(0.0));   // contrast
    CHECK(f[2] == doctest::Approx(1.0));   // energy
    CHECK(f[3] == doctest::Approx(1.0));   // homogeneity
    CHECK(f[4] == doctest::Approx(0.0));   // entropy
    CHECK(f[5] == doctest::Approx(0.0));   // dissimilarity
    CHECK(f[6] == doctest::Approx(1.0));   // max probability
}

TEST_CASE("glcm of vertical stripes: zero diagonal at 0 degrees, contrast (a-b)^2") {
    // quantized levels: 32 -> 1, 96 -> 3 at 8 levels
    GrayImage img = make_image(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) img.at(x, y) = (x % 2) ? 96 : 32;
    const std::vector<double> m = glcm_matrix(img, 8, 1, 0);
    for (int i = 0; i < 8; ++i) CHECK(m[i * 8 + i] == 0.0);
    const auto d = glcm_descriptors(m, 8);
    CHECK(d[0] == doctest::Approx(4.0));  // (3-1)^2
}

TEST_CASE("glcm matrices are symmetric and correlation is bounded") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const GrayImage img = test::random_image(16, 16, seed);
        const std::vector<double> m = glcm_matrix(img, 8, 1, -1);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) CHECK(m[i * 8 + j] == doctest::Approx(m[j * 8 + i]));
        const std::vector<double> f = glcm_features(img);
        CHECK(f[1] >= -1.0 - 1e-9);
        CHECK(f[1] <= 1.0 + 1e-9);
    }
}

TEST_CASE("hu: centered disk is round") {
    GrayImage img = make_image(512, 512);
    for (int y = 0; y < 512; ++y)
        for (int x = 0; x < 512; ++x) {
            const double dx = x - 255.5, dy = y - 255.5;
            if (dx * dx + dy * dy <= 180.0 * 180.0) img.at(x, y) = 255;
        }
    const std::vector<double> f = hu_features(img);
    REQUIRE(f.size() == 9);
    CHECK(f[8] <= 0.05);  // eccentricity
}

TEST_CASE("hu invariants 1-8 survive a 90 degree rotation") {
    const GrayImage img = test::random_image(64, 48, 5);
    const std::vector<double> a = hu_features(img);
    const std::vector<double> b = hu_features(rotate90(img));
    for (int i = 0; i < 8; ++i) CHECK(rel_diff(a[i], b[i]) < 1e-6);
}

TEST_CASE("hu invariants ignore global intensity scaling") {
    GrayImage img = test::random_image(32, 32, 8);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(p / 2);  // keep 2x in range
    GrayImage doubled = img;
    for (auto& p : doubled.pixels) p = static_cast<std::uint8_t>(p * 2);
    const std::vector<double> a = hu_features(img);
    const std::vector<double> b = hu_features(doubled);
    for (int i = 0; i < 9; ++i) CHECK(rel_diff(a[i], b[i]) < 1e-9);
}

TEST_CASE("hu rejects the all-zero image") {
    CHECK_THROWS_AS(hu_features(make_image(8, 8, 0)), DataError);
}

TEST_CASE("raw extraction: 74 stable names, deterministic finite values") {
    const auto& names = raw_feature_names();
    REQUIRE(names.size() == 74);
    CHECK(names[0] == "dwt_LL1_mean");
    CHECK(names[39] == "dwt_HH2_kurtosis");
    CHECK(names[40] == "glcm_contrast");
    CHECK(names[57] == "glcm_idmn");
    CHECK(names[58] == "hu_h1");
    CHECK(names[66] == "hu_eccentricity");
    CHECK(names[67] == "ent_kapur_ab");
    CHECK(names[73] == "ent_yager");

    const GrayImage img = test::random_image(64, 64, 77);
    const FeatureVector a = extract_raw(img, SourceTag::original);
    const FeatureVector b = extract_raw(img, SourceTag::original);
    REQUIRE(a.values.size() == 74);
    CHECK(a.names == names);
    CHECK(a.values == b.values);  // bit-for-bit deterministic
    for (double v : a.values) CHECK(std::isfinite(v));
}

TEST_CASE("raw extraction on a constant image composes the family base cases") {
    const FeatureVector fv = extract_raw(make_image(16, 16, 50), SourceTag::original);
    // DWT detail means and energies vanish
    CHECK(fv.values[5] == doctest::Approx(0.0));
    CHECK(fv.values[7] == doctest::Approx(0.0));
    // GLCM energy 1
    CHECK(fv.values[42] == doctest::Approx(1.0));
    // entropy features 0 (point-mass histogram)
    CHECK(fv.values[71] == doctest::Approx(0.0));  // ent_shannon
    CHECK(fv.values[68] == doctest::Approx(0.0));  // ent_max_h
}

TEST_CASE("features finite on synthetic-like content") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const GrayImage img = test::random_image(128, 128, seed);
        const FeatureVector fv = extract_raw(img, SourceTag::roi);
        for (double v : fv.values) CHECK(std::isfinite(v));
    }
}
