#include "png_io.hpp"

#include "errors.hpp"

#include <png.h>
#include <zlib.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace specsharp {

namespace {

struct ImageGuard {
    png_image image{};
    ImageGuard() {
        image.version = PNG_IMAGE_VERSION;
    }
    ~ImageGuard() { png_image_free(&image); }
};

}  // namespace

EncodedImage decode_png(std::span<const std::uint8_t> bytes) {
    ImageGuard guard;
    png_image& img = guard.image;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
        throw DecodeError(std::string("not a readable PNG: ") + img.message);
    if (img.format & PNG_FORMAT_FLAG_LINEAR)
        throw DecodeError("unsupported bit depth: only 8-bit PNG is accepted");
    if (img.format & PNG_FORMAT_FLAG_ALPHA)
        throw DecodeError("unsupported channel count: PNG has an alpha channel");

    EncodedImage out;
    out.width = static_cast<int>(img.width);
    out.height = static_cast<int>(img.height);
    const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
    out.channels = color ? 3 : 1;
    img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    out.pixels.resize(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr))
        throw DecodeError(std::string("PNG decode failed: ") + img.message);
    return out;
}

EncodedImage read_png(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_png(bytes);
}

std::vector<std::uint8_t> encode_png(const EncodedImage& image) {
    require(image.channels == 1 || image.channels == 3, "PNG encoding supports 1 or 3 channels");
    require(image.width > 0 && image.height > 0, "PNG encoding needs a nonempty image");
    require(image.pixels.size() == static_cast<std::size_t>(image.width) * image.height *
                                       image.channels,
            "pixel buffer does not match image dimensions");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png == nullptr)
        throw IoError("PNG encode failed: out of memory");
    png_infop info = png_create_info_struct(png);
    std::vector<std::uint8_t> out;
    std::vector<png_const_bytep> rows(static_cast<std::size_t>(image.height));
    if (info == nullptr || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encode failed");
    }
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep data, png_size_t length) {
            auto* sink = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
            sink->insert(sink->end(), data, data + length);
        },
        nullptr);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8,
                 image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_sRGB_gAMA_and_cHRM(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
    png_set_compression_level(png, 1);
    png_set_compression_strategy(png, Z_RLE);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_SUB);
    const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels;
    for (std::size_t y = 0; y < rows.size(); ++y)
        rows[y] = image.pixels.data() + y * stride;
    png_set_rows(png, info, const_cast<png_bytepp>(rows.data()));
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

void write_png(const std::filesystem::path& path, const EncodedImage& image) {
    const auto bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("failed writing " + path.string());
}

}  // namespace specsharp
