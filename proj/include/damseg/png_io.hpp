#pragma once

#include <png.h>

#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "damseg/raster.hpp"

namespace damseg {

enum class PaletteMode {
  expand,   // palette images decode to RGB colors
  indices,  // palette and low-bit gray images decode to raw sample values
};

namespace detail {

struct PngReadState {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
  std::string error;
};

struct PngWriteState {
  std::vector<std::uint8_t> bytes;
  std::string error;
};

inline void png_error_fn(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err) *err = msg;
  png_longjmp(png, 1);
}

inline void png_warning_fn(png_structp, png_const_charp) {}

inline void png_read_fn(png_structp png, png_bytep out, png_size_t len) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->offset + len > st->bytes.size()) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, st->bytes.data() + st->offset, len);
  st->offset += len;
}

inline void png_write_fn(png_structp png, png_bytep in, png_size_t len) {
  auto* st = static_cast<PngWriteState*>(png_get_io_ptr(png));
  st->bytes.insert(st->bytes.end(), in, in + len);
}

inline void png_flush_fn(png_structp) {}

struct DecodedPng {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;
};

// libpng reports errors through longjmp; everything with a destructor lives
// in the caller or in `st`/`out`, which outlive the setjmp frame.
inline bool decode_raw(PngReadState& st, PaletteMode mode, DecodedPng& out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st.error, png_error_fn,
                                           png_warning_fn);
  if (!png) {
    st.error = "png_create_read_struct failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    st.error = "png_create_info_struct failed";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &st, png_read_fn);
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth == 16) png_error(png, "16-bit PNG is not supported");
  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    if (mode == PaletteMode::expand) {
      png_set_palette_to_rgb(png);
    } else if (bit_depth < 8) {
      png_set_packing(png);
    }
  } else if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    if (mode == PaletteMode::expand) {
      png_set_expand_gray_1_2_4_to_8(png);
    } else {
      png_set_packing(png);
    }
  }
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    // Transparency is irrelevant here; drop it instead of expanding to alpha.
    png_free_data(png, info, PNG_FREE_TRNS, -1);
  }
  png_read_update_info(png, info);

  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.channels = png_get_channels(png, info);
  const png_size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<png_size_t>(out.width) * out.channels) {
    png_error(png, "unexpected row layout");
  }
  out.pixels.resize(rowbytes * out.height);
  for (png_uint_32 y = 0; y < out.height; ++y) {
    png_read_row(png, out.pixels.data() + rowbytes * y, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

inline bool encode_raw(const Raster& img, PngWriteState& st) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &st.error, png_error_fn,
                                            png_warning_fn);
  if (!png) {
    st.error = "png_create_write_struct failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    st.error = "png_create_info_struct failed";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &st, png_write_fn, png_flush_fn);
  // Encoder settings are pinned so identical rasters give identical bytes.
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_ALL_FILTERS);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 8,
               img.is_gray() ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_BASE, PNG_FILTER_TYPE_BASE);
  png_write_info(png, info);
  const auto rowbytes = static_cast<std::size_t>(img.width()) * img.channels();
  const auto data = img.data();
  for (int y = 0; y < img.height(); ++y) {
    png_write_row(png, const_cast<png_bytep>(data.data() + rowbytes * y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace detail

// Decodes an 8-bit PNG. Alpha is discarded; gray stays 1-channel, color
// (or expanded palette) becomes 3-channel.
inline Raster decode_png(std::span<const std::uint8_t> bytes,
                         PaletteMode mode = PaletteMode::expand) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw FormatError("not a PNG stream");
  }
  detail::PngReadState st{bytes, 0, {}};
  detail::DecodedPng raw;
  if (!detail::decode_raw(st, mode, raw)) throw FormatError("PNG decode failed: " + st.error);
  if (raw.channels != 1 && raw.channels != 3) {
    throw FormatError("PNG decoded to unsupported channel count " + std::to_string(raw.channels));
  }
  return Raster(static_cast<int>(raw.width), static_cast<int>(raw.height), raw.channels,
                std::move(raw.pixels));
}

inline std::vector<std::uint8_t> encode_png(const Raster& img) {
  detail::PngWriteState st;
  if (!detail::encode_raw(img, st)) throw FormatError("PNG encode failed: " + st.error);
  return std::move(st.bytes);
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path,
                             std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline Raster read_png(const std::filesystem::path& path,
                       PaletteMode mode = PaletteMode::expand) {
  try {
    return decode_png(read_file_bytes(path), mode);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_png(const std::filesystem::path& path, const Raster& img) {
  write_file_bytes(path, encode_png(img));
}

}  // namespace damseg
