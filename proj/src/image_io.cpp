#include "jpegrad/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "jpegrad/errors.hpp"

namespace jpegrad {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string temp_path_for(const std::string& path) {
    return path + ".tmp";
}

void rename_into_place(const std::string& tmp, const std::string& path) {
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("rename failed for " + path + ": " + ec.message());
    }
}

}  // namespace

ImageTensor load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw IoError(path + " is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng failed reading " + path);
    }

    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    // Normalize everything to 8-bit RGB.
    png_set_expand(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (png_get_color_type(png, info) & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    const png_byte color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int h = static_cast<int>(png_get_image_height(png, info));
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int stride = static_cast<int>(png_get_rowbytes(png, info));
    if (stride != w * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path + ": unexpected row layout after RGB normalization");
    }

    std::vector<png_byte> pixels(static_cast<std::size_t>(h) * stride);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    ImageTensor img(h, w, 3);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        img.data[i] = static_cast<float>(pixels[i]) / 255.0f;
    return img;
}

void save_png(const std::string& path, const ImageTensor& img) {
    if (img.channels != 3) throw IoError("save_png: expected a 3-channel image");

    std::vector<png_byte> pixels(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const float v = std::min(1.0f, std::max(0.0f, img.data[i]));
        const long q = std::lround(v * 255.0f);  // half away from zero
        pixels[i] = static_cast<png_byte>(q < 0 ? 0 : (q > 255 ? 255 : q));
    }

    const std::string tmp = temp_path_for(path);
    {
        FilePtr fp(std::fopen(tmp.c_str(), "wb"));
        if (!fp) throw IoError("cannot create " + tmp);

        png_structp png =
            png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (!png) throw IoError("libpng init failed");
        png_infop info = png_create_info_struct(png);
        if (!info) {
            png_destroy_write_struct(&png, nullptr);
            throw IoError("libpng init failed");
        }
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            throw IoError("libpng failed writing " + tmp);
        }

        png_init_io(png, fp.get());
        png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                     static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);

        std::vector<png_bytep> rows(img.height);
        for (int y = 0; y < img.height; ++y)
            rows[y] = pixels.data() + static_cast<std::size_t>(y) * img.width * 3;
        png_write_image(png, rows.data());
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
    }
    rename_into_place(tmp, path);
}

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = temp_path_for(path);
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw IoError("cannot create " + tmp);
        f << content;
        if (!f) throw IoError("write failed for " + tmp);
    }
    rename_into_place(tmp, path);
}

}  // namespace jpegrad
