#pragma once

// Grayscale PNG export and ingestion on top of libpng.

#include "error.hpp"
#include "tensor.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>

namespace mocosim {

namespace detail {

struct FileCloser
{
  void operator()(std::FILE *f) const noexcept
  {
    if (f) {
      std::fclose(f);
    }
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline void png_error_throw(png_structp, png_const_charp msg) { throw Error(std::string("libpng: ") + msg); }
inline void png_warning_ignore(png_structp, png_const_charp) {}

} // namespace detail

/// Maps values to 8-bit levels via (v - min) / (max - min) * 255; a constant image maps to 0.
inline std::vector<std::uint8_t> quantize_8bit(std::span<double const> values)
{
  std::vector<std::uint8_t> out(values.size(), 0);
  if (values.empty()) {
    return out;
  }
  auto const [lo, hi] = std::minmax_element(values.begin(), values.end());
  double const min = *lo, max = *hi;
  if (!(max > min)) {
    return out;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    double const level = std::round((values[i] - min) / (max - min) * 255.0);
    out[i] = static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
  }
  return out;
}

inline void write_png_gray8(
  std::filesystem::path const &path, std::size_t height, std::size_t width, std::span<std::uint8_t const> pixels)
{
  detail::FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) {
    throw IoError(path.string(), "cannot open for writing");
  }
  png_structp png =
    png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, detail::png_error_throw, detail::png_warning_ignore);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("libpng: cannot allocate write structs");
  }
  try {
    png_init_io(png, file.get());
    png_set_IHDR(
      png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_GRAY,
      PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t r = 0; r < height; ++r) {
      png_write_row(png, const_cast<png_bytep>(pixels.data() + r * width));
    }
    png_write_end(png, nullptr);
  } catch (Error const &e) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string(), e.what());
  }
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) {
    throw IoError(path.string(), "write failed");
  }
}

/// Writes the normalized magnitude of `image` as an 8-bit grayscale PNG.
inline void export_png(RealImage const &image, std::filesystem::path const &path)
{
  std::vector<double> mag(image.size());
  std::transform(image.data().begin(), image.data().end(), mag.begin(), [](double v) { return std::abs(v); });
  write_png_gray8(path, image.height(), image.width(), quantize_8bit(mag));
}

inline void export_png(ComplexImage const &image, std::filesystem::path const &path)
{
  export_png(magnitude(image), path);
}

/// Reads an 8- or 16-bit grayscale PNG into [0, 1] by dividing by the bit-depth maximum.
inline RealImage ingest_png(std::filesystem::path const &path)
{
  detail::FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) {
    throw IoError(path.string(), "cannot open for reading");
  }
  png_byte signature[8] = {};
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw FormatError(FormatError::Kind::BadMagic, path.string(), "not a PNG file");
  }
  png_structp png =
    png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, detail::png_error_throw, detail::png_warning_ignore);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("libpng: cannot allocate read structs");
  }
  RealImage out;
  try {
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    auto const color = png_get_color_type(png, info);
    int const depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16)) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw FormatError(
        FormatError::Kind::Unsupported, path.string(), "only 8- or 16-bit grayscale PNG is supported");
    }
    if (depth == 16) {
      png_set_swap(png); // libpng delivers big-endian samples; read host-order uint16
    }
    png_read_update_info(png, info);
    std::size_t const width = png_get_image_width(png, info);
    std::size_t const height = png_get_image_height(png, info);
    std::size_t const stride = png_get_rowbytes(png, info);
    std::vector<png_byte> rows(stride * height);
    std::vector<png_bytep> row_ptrs(height);
    for (std::size_t r = 0; r < height; ++r) {
      row_ptrs[r] = rows.data() + r * stride;
    }
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);

    out = RealImage(height, width);
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        if (depth == 8) {
          out(r, c) = rows[r * stride + c] / 255.0;
        } else {
          std::uint16_t v;
          std::memcpy(&v, rows.data() + r * stride + 2 * c, 2);
          out(r, c) = v / 65535.0;
        }
      }
    }
  } catch (FormatError const &) {
    throw;
  } catch (Error const &e) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string(), e.what());
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

} // namespace mocosim
