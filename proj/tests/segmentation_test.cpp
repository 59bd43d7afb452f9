#include <doctest.h>

#include <set>

#include "ctmls/errors.hpp"
#include "ctmls/segmentation.hpp"
#include "test_util.hpp"

using namespace ctmls;

TEST_CASE("trilevel quantization maps constant images to themselves") {
    const GrayImage img = make_image(4, 4, 100);
    const QuantizedImage q = apply_trilevel(img, make_triple(64, 128, 192));
    for (auto p : q.image.pixels) CHECK(p == 100);
}

TEST_CASE("trilevel quantization uses rounded segment means") {
    const GrayImage img = make_image(4, 1, std::vector<std::uint8_t>{0, 63, 64, 255});
    const QuantizedImage q = apply_trilevel(img, make_triple(64, 128, 192));
    // segment [0,63] holds {0,63}, mean 31.5 -> 32; [64,127] holds {64};
    // [192,255] holds {255}
    CHECK(q.image.pixels == std::vector<std::uint8_t>{32, 32, 64, 255});
}

TEST_CASE("trilevel output has at most 4 distinct values over 1000 random images") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const GrayImage img = test::random_image(8, 8, seed);
        const QuantizedImage q = apply_trilevel(img, make_triple(64, 128, 192));
        const std::set<std::uint8_t> distinct(q.image.pixels.begin(), q.image.pixels.end());
        CHECK(distinct.size() <= 4);
    }
}

TEST_CASE("trilevel quantization is idempotent and preserves segment mass") {
    const ThresholdTriple th = make_triple(50, 120, 200);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GrayImage img = test::random_image(16, 16, seed);
        const QuantizedImage once = apply_trilevel(img, th);
        const QuantizedImage twice = apply_trilevel(once.image, th);
        CHECK(once.image.pixels == twice.image.pixels);

        // pixel count per segment is unchanged by quantization
        const Histogram before = histogram(img), after = histogram(once.image);
        const int bounds[5] = {0, th.t1, th.t2, th.t3, 256};
        for (int k = 0; k < 4; ++k) {
            std::uint64_t nb = 0, na = 0;
            for (int i = bounds[k]; i < bounds[k + 1]; ++i) {
                nb += before.counts[i];
                na += after.counts[i];
            }
            CHECK(nb == na);
        }
    }
}

TEST_CASE("threshold filter keeps dark pixels in the roi") {
    const GrayImage img = make_image(5, 1, std::vector<std::uint8_t>{0, 100, 179, 200, 255});
    const RoiPair pair = threshold_filter(img, 179);
    CHECK(pair.roi.pixels == std::vector<std::uint8_t>{0, 100, 179, 0, 0});
    CHECK(pair.artifact.pixels == std::vector<std::uint8_t>{0, 0, 0, 200, 255});
    CHECK(pair.th == 179);
}

TEST_CASE("threshold filter: all-dark image goes entirely to roi") {
    const GrayImage img = make_image(3, 3, 0);
    const RoiPair pair = threshold_filter(img, 179);
    CHECK(pair.roi.pixels == img.pixels);
    for (auto p : pair.artifact.pixels) CHECK(p == 0);
}

TEST_CASE("threshold filter partition property") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GrayImage img = test::random_image(9, 9, seed);
        const RoiPair pair = threshold_filter(img, 128);
        for (std::size_t i = 0; i < img.pixels.size(); ++i) {
            CHECK(std::max(pair.roi.pixels[i], pair.artifact.pixels[i]) == img.pixels[i]);
            if (img.pixels[i] != 0) {
                // exactly one side holds the original value
                CHECK((pair.roi.pixels[i] == 0) != (pair.artifact.pixels[i] == 0));
                CHECK(pair.roi.pixels[i] + pair.artifact.pixels[i] == img.pixels[i]);
            }
        }
    }
}

TEST_CASE("threshold filter rejects out-of-range levels") {
    const GrayImage img = make_image(2, 2, 0);
    CHECK_THROWS_AS(threshold_filter(img, 0), ConfigError);
    CHECK_THROWS_AS(threshold_filter(img, 255), ConfigError);
}
