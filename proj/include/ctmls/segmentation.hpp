#pragma once

#include "ctmls/entropy.hpp"
#include "ctmls/image.hpp"

namespace ctmls {

// Tri-level thresholded image: at most four distinct pixel values, each the
// rounded mean input intensity of its segment.
struct QuantizedImage {
    GrayImage image;
    ThresholdTriple thresholds;
};

// <=Th / >Th split of an image. roi and artifact partition the source: each
// pixel keeps its value on exactly one side and is 0 on the other.
struct RoiPair {
    GrayImage roi;       // intensity <= th (lung field side)
    GrayImage artifact;  // intensity > th (bone / border side)
    int th = 0;
};

// Maps every pixel to the rounded mean intensity of its segment
// ([0,t1-1], [t1,t2-1], [t2,t3-1], [t3,255]); empty segments map to their
// lower bound. Idempotent on its own output.
QuantizedImage apply_trilevel(const GrayImage& img, const ThresholdTriple& th);

// Fixed threshold filter; th in [1,254]. Pixels equal to th go to the roi.
RoiPair threshold_filter(const GrayImage& img, int th);

}  // namespace ctmls
