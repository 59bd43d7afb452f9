#include "ctmls/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "ctmls/errors.hpp"
#include "ctmls/rng.hpp"

namespace ctmls {

namespace {

constexpr int kSide = 512;

struct Ellipse {
    double cx, cy, rx, ry;
    double dist2(double x, double y) const {
        const double u = (x - cx) / rx, v = (y - cy) / ry;
        return u * u + v * v;
    }
};

struct Wave {
    double kx, ky, phase, amp;
    double eval(double x, double y) const { return amp * std::cos(kx * x + ky * y + phase); }
};

struct Patch {
    double cx, cy, r;
};

// Per-pixel white noise, a pure function of (stream, x, y).
double pixel_noise(std::uint64_t stream, int x, int y) {
    const std::uint64_t h = splitmix64(stream ^ splitmix64(
                                (static_cast<std::uint64_t>(x) << 32) | static_cast<std::uint32_t>(y)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

GrayImage synth_image(std::uint64_t seed, std::uint64_t index, bool label_covid) {
    Rng rng(derive_seed(seed, index));
    const std::uint64_t noise_stream = derive_seed(seed, index ^ 0xabcdefULL);

    const Ellipse body{256.0 + rng.uniform(-8, 8), 258.0 + rng.uniform(-8, 8),
                       206.0 + rng.uniform(-10, 10), 232.0 + rng.uniform(-10, 10)};
    const Ellipse lungs[2] = {
        {256.0 - 96.0 + rng.uniform(-6, 6), 264.0 + rng.uniform(-8, 8), 74.0 + rng.uniform(-6, 6),
         132.0 + rng.uniform(-8, 8)},
        {256.0 + 96.0 + rng.uniform(-6, 6), 264.0 + rng.uniform(-8, 8), 74.0 + rng.uniform(-6, 6),
         132.0 + rng.uniform(-8, 8)}};

    std::array<Wave, 3> waves;
    for (Wave& w : waves) {
        const double period = rng.uniform(180.0, 420.0);
        const double theta = rng.uniform(0.0, 3.14159265358979);
        const double k = 2.0 * 3.14159265358979 / period;
        w = Wave{k * std::cos(theta), k * std::sin(theta), rng.uniform(0.0, 6.28318530717959),
                 rng.uniform(6.0, 12.0)};
    }

    std::vector<Patch> patches;
    if (label_covid) {
        const int n_patches = rng.uniform_int(4, 7);
        for (int i = 0; i < n_patches; ++i) {
            const Ellipse& lung = lungs[rng.uniform_int(0, 1)];
            const double ang = rng.uniform(0.0, 6.28318530717959);
            const double rad = std::sqrt(rng.uniform(0.0, 0.55));
            patches.push_back({lung.cx + rad * lung.rx * std::cos(ang),
                               lung.cy + rad * lung.ry * std::sin(ang),
                               rng.uniform(18.0, 38.0)});
        }
    }

    GrayImage img = make_image(kSide, kSide);
    for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
            double wave = 0.0;
            for (const Wave& w : waves) wave += w.eval(x, y);

            const double rb = body.dist2(x, y);
            double v;
            if (rb > 1.08) {
                v = 4.0 + 0.2 * wave;
            } else if (rb > 0.94) {
                v = 226.0 + 0.5 * wave;  // bright border ring
            } else {
                v = 96.0 + wave;  // soft tissue
                bool in_lung = false;
                for (const Ellipse& lung : lungs)
                    if (lung.dist2(x, y) <= 1.0) in_lung = true;
                if (in_lung) {
                    v = 30.0 + wave;
                    for (const Patch& p : patches) {
                        const double dx = x - p.cx, dy = y - p.cy;
                        if (dx * dx + dy * dy <= p.r * p.r) {
                            v = 124.0 + 52.0 * (2.0 * pixel_noise(noise_stream, x, y) - 1.0);
                            break;
                        }
                    }
                }
            }
            const long r = std::lround(v);
            img.at(x, y) = static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
        }
    }
    return img;
}

DatasetManifest synth_dataset(std::uint64_t seed, int n_per_class,
                              const std::filesystem::path& out_dir) {
    if (n_per_class < 1) throw ConfigError("n_per_class must be >= 1");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (!std::filesystem::is_directory(out_dir))
        throw DataError("cannot create output directory " + out_dir.string());

    DatasetManifest manifest;
    char name[32];
    for (int cls = 0; cls < 2; ++cls) {
        const bool covid = cls == 1;
        for (int i = 0; i < n_per_class; ++i) {
            const std::uint64_t index = static_cast<std::uint64_t>(cls) * n_per_class + i;
            const GrayImage img = synth_image(seed, index, covid);
            std::snprintf(name, sizeof(name), "%s_%03d.pgm", covid ? "covid" : "normal", i);
            const std::filesystem::path p = out_dir / name;
            save_pgm(img, p);
            manifest.records.push_back({p, covid ? kLabelCovid : kLabelNormal});
        }
    }
    save_manifest(manifest, out_dir / "manifest.csv");
    return manifest;
}

}  // namespace ctmls
