#include "exdeblur/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "exdeblur/error.hpp"

namespace exdeblur {

namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

std::string lower_ext(const std::filesystem::path& p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e;
}

std::uint8_t quantize(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

// Interleaved 8-bit pixels with 1 (gray) or 3 (RGB) channels.
struct Raster {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;
};

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};

bool has_png_signature(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), 8);
    return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

Raster read_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("libpng initialization failed");
    }
    Raster r;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("corrupt PNG file " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png), png_set_strip_alpha(png);
    png_read_update_info(png, info);
    r.width = static_cast<int>(png_get_image_width(png, info));
    r.height = static_cast<int>(png_get_image_height(png, info));
    r.channels = png_get_channels(png, info);
    if (r.width <= 0 || r.height <= 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("zero-dimension image " + path.string());
    }
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    r.pixels.resize(rowbytes * r.height);
    rows.resize(r.height);
    for (int y = 0; y < r.height; ++y) rows[y] = r.pixels.data() + rowbytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    if (r.channels != 1 && r.channels != 3) throw FormatError("unsupported PNG channel layout");
    return r;
}

void write_png(const Raster& r, const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng initialization failed");
    }
    std::vector<png_bytep> rows(r.height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed writing PNG " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, r.width, r.height, 8,
                 r.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(r.width) * r.channels;
    for (int y = 0; y < r.height; ++y) {
        rows[y] = const_cast<png_bytep>(r.pixels.data() + stride * y);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// Skips whitespace and '#' comments between PNM header tokens.
int read_pnm_int(std::istream& in) {
    int c;
    while ((c = in.peek()) != EOF) {
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int v = -1;
    if (!(in >> v)) throw FormatError("malformed PNM header");
    return v;
}

Raster read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[2] = {};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
        throw FormatError("unsupported image format: " + path.string());
    }
    Raster r;
    r.channels = magic[1] == '5' ? 1 : 3;
    r.width = read_pnm_int(in);
    r.height = read_pnm_int(in);
    const int maxval = read_pnm_int(in);
    if (r.width <= 0 || r.height <= 0) throw FormatError("zero-dimension image " + path.string());
    if (maxval <= 0 || maxval > 255) throw FormatError("only 8-bit PNM is supported");
    in.get();  // single whitespace before the raster
    r.pixels.resize(static_cast<std::size_t>(r.width) * r.height * r.channels);
    in.read(reinterpret_cast<char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(r.pixels.size())) {
        throw FormatError("truncated PNM raster in " + path.string());
    }
    if (maxval != 255) {
        for (auto& p : r.pixels) p = static_cast<std::uint8_t>(std::lround(p * 255.0 / maxval));
    }
    return r;
}

void write_pnm(const Raster& r, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << (r.channels == 1 ? "P5" : "P6") << '\n' << r.width << ' ' << r.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

Raster read_raster(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    if (has_png_signature(path)) return read_png(path);
    return read_pnm(path);
}

void write_raster(const Raster& r, const std::filesystem::path& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".png") {
        write_png(r, path);
    } else if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
        if (ext == ".pgm" && r.channels != 1) throw FormatError("PGM holds one channel");
        write_pnm(r, path);
    } else {
        throw FormatError("unsupported output format: " + path.string());
    }
}

GrayImage channel(const Raster& r, int c) {
    std::vector<double> d(static_cast<std::size_t>(r.width) * r.height);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = r.pixels[i * r.channels + c] / 255.0;
    return {r.width, r.height, std::move(d)};
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
    const Raster r = read_raster(path);
    if (r.channels == 1) return channel(r, 0);
    std::vector<double> d(static_cast<std::size_t>(r.width) * r.height);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const std::uint8_t* p = &r.pixels[i * 3];
        d[i] = (kLumaR * p[0] + kLumaG * p[1] + kLumaB * p[2]) / 255.0;
    }
    return {r.width, r.height, std::move(d)};
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
    if (img.empty()) throw DimensionError("cannot save an empty image");
    Raster r{img.width(), img.height(), 1, std::vector<std::uint8_t>(img.size())};
    for (std::size_t i = 0; i < img.size(); ++i) r.pixels[i] = quantize(img.data()[i]);
    write_raster(r, path);
}

bool is_color_file(const std::filesystem::path& path) { return read_raster(path).channels == 3; }

RgbImage load_rgb(const std::filesystem::path& path) {
    const Raster r = read_raster(path);
    if (r.channels == 1) {
        GrayImage g = channel(r, 0);
        return {g, g, g};
    }
    return {channel(r, 0), channel(r, 1), channel(r, 2)};
}

void save_rgb(const RgbImage& img, const std::filesystem::path& path) {
    const GrayImage* ch[3] = {&img.r, &img.g, &img.b};
    for (const auto* c : ch) {
        if (!c->same_shape(img.r)) throw DimensionError("RGB channels differ in size");
    }
    Raster r{img.r.width(), img.r.height(), 3, std::vector<std::uint8_t>(img.r.size() * 3)};
    for (std::size_t i = 0; i < img.r.size(); ++i) {
        for (int c = 0; c < 3; ++c) r.pixels[i * 3 + c] = quantize(ch[c]->data()[i]);
    }
    write_raster(r, path);
}

}  // namespace exdeblur
