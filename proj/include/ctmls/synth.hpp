#pragma once

#include <cstdint>
#include <filesystem>

#include "ctmls/image.hpp"
#include "ctmls/manifest.hpp"

namespace ctmls {

// Generates 2*n_per_class labeled 512x512 P5 images plus a manifest.csv in
// out_dir, byte-identical for a given (seed, n_per_class). The normal class
// is a smooth chest-like phantom (dark lung fields inside a bright body ring);
// the covid class adds mid-intensity mottled patches inside the lungs, which
// raises GLCM contrast and histogram entropy.
DatasetManifest synth_dataset(std::uint64_t seed, int n_per_class,
                              const std::filesystem::path& out_dir);

// One phantom slice; label_covid selects the mottled variant.
GrayImage synth_image(std::uint64_t seed, std::uint64_t index, bool label_covid);

}  // namespace ctmls
