#include "image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

namespace unireg {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

double select_channel(ChannelSelector sel, double r, double g, double b) {
    switch (sel) {
        case ChannelSelector::red:
            return r;
        case ChannelSelector::green:
            return g;
        case ChannelSelector::blue:
            return b;
        case ChannelSelector::luma:
            return 0.299 * r + 0.587 * g + 0.114 * b;
        case ChannelSelector::gray:
            return r;  // gray images carry the value in every channel
    }
    return r;
}

ScalarField load_png(const std::string& path, ChannelSelector selector) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open image: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("failed to decode PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_expand(png);       // palette/low-bit gray -> 8-bit
    png_set_strip_alpha(png);
    if (png_get_bit_depth(png, info) == 16) png_set_swap(png);  // LE words
    png_read_update_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int channels = png_get_channels(png, info);
    const double scale = bit_depth == 16 ? 65535.0 : 255.0;

    std::vector<std::vector<png_byte>> rows(height,
                                            std::vector<png_byte>(png_get_rowbytes(png, info)));
    std::vector<png_bytep> row_ptrs(height);
    for (png_uint_32 y = 0; y < height; ++y) row_ptrs[y] = rows[y].data();
    png_read_image(png, row_ptrs.data());
    png_destroy_read_struct(&png, &info, nullptr);

    ScalarField field({static_cast<int>(height), static_cast<int>(width)});
    for (png_uint_32 y = 0; y < height; ++y) {
        for (png_uint_32 x = 0; x < width; ++x) {
            double c[4] = {0, 0, 0, 0};
            for (int ch = 0; ch < channels; ++ch) {
                if (bit_depth == 16) {
                    uint16_t v;
                    std::memcpy(&v, &rows[y][(x * channels + ch) * 2], 2);
                    c[ch] = v / scale;
                } else {
                    c[ch] = rows[y][x * channels + ch] / scale;
                }
            }
            const double val = channels >= 3 ? select_channel(selector, c[0], c[1], c[2]) : c[0];
            field.values[static_cast<long>(y) * width + x] = val;
        }
    }
    return field;
}

ScalarField load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P2")
        throw std::runtime_error("unsupported PGM magic '" + magic + "' in " + path);
    const auto next_token = [&]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw std::runtime_error("truncated PGM header: " + path);
    };
    const int width = std::stoi(next_token());
    const int height = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (maxval <= 0 || maxval > 65535)
        throw std::runtime_error("unsupported PGM maxval in " + path);

    ScalarField field({height, width});
    const long n = field.count();
    if (magic == "P2") {
        for (long i = 0; i < n; ++i) {
            long v;
            in >> v;
            field.values[i] = static_cast<double>(v) / maxval;
        }
    } else {
        in.get();  // single whitespace after maxval
        if (maxval < 256) {
            std::vector<uint8_t> buf(n);
            in.read(reinterpret_cast<char*>(buf.data()), n);
            if (!in) throw std::runtime_error("truncated PGM payload: " + path);
            for (long i = 0; i < n; ++i) field.values[i] = buf[i] / static_cast<double>(maxval);
        } else {
            std::vector<uint8_t> buf(n * 2);
            in.read(reinterpret_cast<char*>(buf.data()), n * 2);
            if (!in) throw std::runtime_error("truncated PGM payload: " + path);
            for (long i = 0; i < n; ++i) {
                const int v = (buf[2 * i] << 8) | buf[2 * i + 1];  // PGM is big-endian
                field.values[i] = v / static_cast<double>(maxval);
            }
        }
    }
    return field;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(),
                      [](char a, char b) { return std::tolower(a) == std::tolower(b); });
}

}  // namespace

ScalarField load_image_2d(const std::string& path, ChannelSelector selector) {
    if (has_suffix(path, ".pgm")) return load_pgm(path);
    if (has_suffix(path, ".png")) return load_png(path, selector);
    throw std::runtime_error("unsupported image format (expect .png or .pgm): " + path);
}

void save_image_png16(const std::string& path, const ScalarField& field) {
    if (field.dim() != 2) throw std::runtime_error("PNG export expects a 2D field");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot write image: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("failed to encode PNG: " + path);
    }
    png_init_io(png, fp.get());
    const int height = field.extents[0], width = field.extents[1];
    png_set_IHDR(png, info, width, height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row(width * 2);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double v = std::clamp(field.values[static_cast<long>(y) * width + x], 0.0, 1.0);
            const uint16_t q = static_cast<uint16_t>(std::lround(v * 65535.0));
            row[2 * x] = static_cast<png_byte>(q >> 8);  // PNG is big-endian
            row[2 * x + 1] = static_cast<png_byte>(q & 0xff);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void save_image_rgb8(const std::string& path, const ScalarField& r, const ScalarField& g,
                     const ScalarField& b) {
    if (r.dim() != 2 || r.extents != g.extents || r.extents != b.extents)
        throw std::runtime_error("RGB export expects three 2D fields with equal geometry");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot write image: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("failed to encode PNG: " + path);
    }
    png_init_io(png, fp.get());
    const int height = r.extents[0], width = r.extents[1];
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row(width * 3);
    const ScalarField* planes[3] = {&r, &g, &b};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < 3; ++c) {
                const double v =
                    std::clamp(planes[c]->values[static_cast<long>(y) * width + x], 0.0, 1.0);
                row[3 * x + c] = static_cast<png_byte>(std::lround(v * 255.0));
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void save_image_pgm(const std::string& path, const ScalarField& field, int bits) {
    if (field.dim() != 2) throw std::runtime_error("PGM export expects a 2D field");
    if (bits != 8 && bits != 16) throw std::runtime_error("PGM export supports 8 or 16 bits");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write image: " + path);
    const int maxval = bits == 8 ? 255 : 65535;
    out << "P5\n" << field.extents[1] << " " << field.extents[0] << "\n" << maxval << "\n";
    for (double vd : field.values) {
        const long v = std::lround(std::clamp(vd, 0.0, 1.0) * maxval);
        if (bits == 16) out.put(static_cast<char>((v >> 8) & 0xff));
        out.put(static_cast<char>(v & 0xff));
    }
}

}  // namespace unireg
