#include "ctmls/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "ctmls/errors.hpp"

namespace ctmls {

GrayImage make_image(int width, int height, std::vector<std::uint8_t> pixels) {
    if (width <= 0 || height <= 0)
        throw DataError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
    if (pixels.size() != static_cast<std::size_t>(width) * height)
        throw DataError("pixel buffer size " + std::to_string(pixels.size()) +
                        " does not match " + std::to_string(width) + "x" + std::to_string(height));
    return GrayImage{width, height, std::move(pixels)};
}

GrayImage make_image(int width, int height, std::uint8_t fill) {
    if (width <= 0 || height <= 0)
        throw DataError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
    return GrayImage{width, height,
                     std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, fill)};
}

namespace {

// PGM token reader: skips whitespace and '#' comment lines.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

int parse_pgm_int(std::istream& in, const char* field) {
    const std::string tok = next_pgm_token(in);
    if (tok.empty()) throw DataError(std::string("PGM header truncated before ") + field);
    for (char ch : tok)
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw DataError(std::string("malformed PGM ") + field + ": '" + tok + "'");
    return std::stoi(tok);
}

GrayImage load_pgm(const std::filesystem::path& path, std::ifstream& in) {
    const int w = parse_pgm_int(in, "width");
    const int h = parse_pgm_int(in, "height");
    const int maxval = parse_pgm_int(in, "maxval");
    if (w <= 0 || h <= 0)
        throw DataError("PGM " + path.string() + ": nonpositive dimensions");
    if (maxval != 255)
        throw DataError("PGM " + path.string() + ": unsupported maxval " + std::to_string(maxval) +
                        " (expected 255)");
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != pixels.size())
        throw DataError("PGM " + path.string() + ": payload shorter than width*height (" +
                        std::to_string(in.gcount()) + " < " + std::to_string(pixels.size()) + ")");
    return make_image(w, h, std::move(pixels));
}

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

GrayImage load_png(const std::filesystem::path& path) {
    PngReadCloser s;
    s.fp = std::fopen(path.string().c_str(), "rb");
    if (!s.fp) throw DataError("cannot open " + path.string());
    s.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!s.png) throw DataError("libpng init failed");
    s.info = png_create_info_struct(s.png);
    if (!s.info) throw DataError("libpng init failed");
    if (setjmp(png_jmpbuf(s.png))) throw DataError("PNG " + path.string() + ": decode error");

    png_init_io(s.png, s.fp);
    png_read_info(s.png, s.info);
    const png_uint_32 w = png_get_image_width(s.png, s.info);
    const png_uint_32 h = png_get_image_height(s.png, s.info);
    const int depth = png_get_bit_depth(s.png, s.info);
    const int color = png_get_color_type(s.png, s.info);
    if (color != PNG_COLOR_TYPE_GRAY)
        throw DataError("PNG " + path.string() +
                        ": unsupported color type (only 8-bit grayscale accepted; convert "
                        "explicitly, no silent luminance conversion)");
    if (depth != 8) {
        if (depth < 8) {
            png_set_expand_gray_1_2_4_to_8(s.png);
        } else {
            throw DataError("PNG " + path.string() + ": unsupported bit depth " +
                            std::to_string(depth) + " (expected 8)");
        }
    }
    png_read_update_info(s.png, s.info);

    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * w;
    png_read_image(s.png, rows.data());
    return make_image(static_cast<int>(w), static_cast<int>(h), std::move(pixels));
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2) throw DataError(path.string() + ": file too short for a header");
    if (magic[0] == 'P' && magic[1] == '5') return load_pgm(path, in);
    const unsigned char png_sig[2] = {0x89, 'P'};
    if (std::memcmp(magic, png_sig, 2) == 0) {
        in.close();
        return load_png(path);
    }
    throw DataError(path.string() + ": unrecognized format (expected P5 PGM or PNG)");
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path,
              const std::string& comment) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << "P5\n";
    if (!comment.empty()) out << "# " << comment << "\n";
    out << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw DataError("short write to " + path.string());
}

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
    if (width <= 0 || height <= 0)
        throw DataError("resize target must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
    if (width == img.width && height == img.height) return img;

    GrayImage out = make_image(width, height);
    const double sx = static_cast<double>(img.width) / width;
    const double sy = static_cast<double>(img.height) / height;
    auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    for (int y = 0; y < height; ++y) {
        const double src_y = (y + 0.5) * sy - 0.5;
        const int y0 = static_cast<int>(std::floor(src_y));
        const double ty = src_y - y0;
        const int ya = clampi(y0, img.height - 1);
        const int yb = clampi(y0 + 1, img.height - 1);
        for (int x = 0; x < width; ++x) {
            const double src_x = (x + 0.5) * sx - 0.5;
            const int x0 = static_cast<int>(std::floor(src_x));
            const double tx = src_x - x0;
            const int xa = clampi(x0, img.width - 1);
            const int xb = clampi(x0 + 1, img.width - 1);
            const double v = (1.0 - ty) * ((1.0 - tx) * img.at(xa, ya) + tx * img.at(xb, ya)) +
                             ty * ((1.0 - tx) * img.at(xa, yb) + tx * img.at(xb, yb));
            const long r = std::lround(v);
            out.at(x, y) = static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
        }
    }
    return out;
}

Histogram histogram(const GrayImage& img) {
    Histogram h;
    for (std::uint8_t p : img.pixels) ++h.counts[p];
    h.total = img.size();
    return h;
}

}  // namespace ctmls
