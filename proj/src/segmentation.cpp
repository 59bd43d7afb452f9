#include "ctmls/segmentation.hpp"

#include <array>
#include <cmath>

#include "ctmls/errors.hpp"

namespace ctmls {

QuantizedImage apply_trilevel(const GrayImage& img, const ThresholdTriple& th) {
    make_triple(th.t1, th.t2, th.t3);  // revalidate

    const Histogram hist = histogram(img);
    const std::array<int, 5> bounds = {0, th.t1, th.t2, th.t3, 256};
    std::array<std::uint8_t, 256> lut{};
    for (int k = 0; k < 4; ++k) {
        const int lo = bounds[k], hi = bounds[k + 1];  // [lo, hi)
        std::uint64_t mass = 0, weighted = 0;
        for (int i = lo; i < hi; ++i) {
            mass += hist.counts[i];
            weighted += hist.counts[i] * static_cast<std::uint64_t>(i);
        }
        const std::uint8_t value =
            mass == 0 ? static_cast<std::uint8_t>(lo)
                      : static_cast<std::uint8_t>(std::llround(static_cast<double>(weighted) /
                                                               static_cast<double>(mass)));
        for (int i = lo; i < hi; ++i) lut[i] = value;
    }

    QuantizedImage out{img, th};
    for (std::uint8_t& p : out.image.pixels) p = lut[p];
    return out;
}

RoiPair threshold_filter(const GrayImage& img, int th) {
    if (th < 1 || th > 254)
        throw ConfigError("filter threshold must be in [1,254], got " + std::to_string(th));
    RoiPair out{img, img, th};
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        if (img.pixels[i] > th) {
            out.roi.pixels[i] = 0;
        } else {
            out.artifact.pixels[i] = 0;
        }
    }
    return out;
}

}  // namespace ctmls
