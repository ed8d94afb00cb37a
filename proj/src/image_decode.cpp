// Raster decoding into Frame. PNG and JPEG go through libpng / libjpeg; PPM,
// PGM and BMP are parsed here.

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdlib>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "bleedscan/error.hpp"
#include "bleedscan/frame_pipeline.hpp"

namespace bleedscan {

namespace {

using Bytes = std::vector<std::uint8_t>;

// Guards against absurd headers before allocating.
constexpr std::uint64_t kMaxPixels = std::uint64_t(1) << 28;

[[noreturn]] void corrupt(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Corrupt, path + ": " + what);
}

[[noreturn]] void bit_depth(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::BitDepth, path + ": unsupported bit depth: " + what);
}

[[noreturn]] void unsupported(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::UnsupportedFormat, path + ": unsupported format: " + what);
}

void check_dimensions(const std::string& path, std::uint64_t w, std::uint64_t h) {
  if (w == 0 || h == 0) corrupt(path, "zero image dimension");
  if (w > kMaxPixels || h > kMaxPixels || w * h > kMaxPixels) {
    corrupt(path, "image dimensions too large");
  }
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, path + ": cannot open file");
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::Io, path + ": read failed");
  return data;
}

// --- PPM / PGM --------------------------------------------------------------

class NetpbmHeader {
 public:
  NetpbmHeader(const Bytes& data, const std::string& path) : data_(data), path_(path) {}

  std::uint64_t next_int() {
    skip_space_and_comments();
    if (pos_ >= data_.size() || !std::isdigit(data_[pos_])) corrupt(path_, "bad PNM header");
    std::uint64_t v = 0;
    while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
      v = v * 10 + (data_[pos_++] - '0');
      if (v > (std::uint64_t(1) << 32)) corrupt(path_, "PNM header value too large");
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= data_.size() || !std::isspace(data_[pos_])) corrupt(path_, "bad PNM header");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      if (std::isspace(data_[pos_])) {
        ++pos_;
      } else if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const Bytes& data_;
  const std::string& path_;
  std::size_t pos_ = 2;
};

Frame decode_pnm(const Bytes& data, const std::string& path) {
  const bool color = data[1] == '6';
  NetpbmHeader header(data, path);
  const auto w = header.next_int();
  const auto h = header.next_int();
  const auto maxval = header.next_int();
  check_dimensions(path, w, h);
  if (maxval != 255) bit_depth(path, "PNM maxval " + std::to_string(maxval));
  const std::size_t offset = header.raster_offset();
  const std::size_t channels = color ? 3 : 1;
  if (data.size() - std::min(data.size(), offset) < w * h * channels) {
    corrupt(path, "truncated PNM raster");
  }
  std::vector<Rgb8> pixels(w * h);
  const std::uint8_t* src = data.data() + offset;
  for (std::size_t i = 0; i < pixels.size(); ++i, src += channels) {
    pixels[i] = color ? Rgb8{src[0], src[1], src[2]} : Rgb8{src[0], src[0], src[0]};
  }
  return Frame(w, h, std::move(pixels), path);
}

// --- BMP --------------------------------------------------------------------

std::uint32_t le32(const Bytes& d, std::size_t at) {
  return std::uint32_t(d[at]) | std::uint32_t(d[at + 1]) << 8 | std::uint32_t(d[at + 2]) << 16 |
         std::uint32_t(d[at + 3]) << 24;
}

std::uint16_t le16(const Bytes& d, std::size_t at) {
  return std::uint16_t(d[at] | d[at + 1] << 8);
}

Frame decode_bmp(const Bytes& data, const std::string& path) {
  if (data.size() < 54) corrupt(path, "truncated BMP header");
  const std::uint32_t pixel_offset = le32(data, 10);
  const std::uint32_t dib_size = le32(data, 14);
  if (dib_size < 40) unsupported(path, "BMP core header");
  if (data.size() < 14 + std::size_t(dib_size)) corrupt(path, "truncated BMP header");
  const auto raw_w = static_cast<std::int32_t>(le32(data, 18));
  const auto raw_h = static_cast<std::int32_t>(le32(data, 22));
  const std::uint16_t bpp = le16(data, 28);
  const std::uint32_t compression = le32(data, 30);
  if (raw_w <= 0 || raw_h == 0 || raw_h == INT32_MIN) corrupt(path, "bad BMP dimensions");
  const bool top_down = raw_h < 0;
  const std::uint64_t w = std::uint64_t(raw_w);
  const std::uint64_t h = top_down ? std::uint64_t(-std::int64_t(raw_h)) : std::uint64_t(raw_h);
  check_dimensions(path, w, h);

  if (bpp == 16 || bpp == 48 || bpp == 64) bit_depth(path, "BMP " + std::to_string(bpp) + " bpp");
  if (bpp != 8 && bpp != 24 && bpp != 32) unsupported(path, "BMP " + std::to_string(bpp) + " bpp");

  constexpr std::uint32_t kRgb = 0;
  constexpr std::uint32_t kBitfields = 3;
  if (compression == kBitfields && bpp == 32) {
    // Masks follow a 40-byte header, or live inside V4/V5 headers.
    if (data.size() < 14 + 40 + 12) corrupt(path, "truncated BMP masks");
    if (le32(data, 54) != 0x00FF0000u || le32(data, 58) != 0x0000FF00u ||
        le32(data, 62) != 0x000000FFu) {
      unsupported(path, "BMP non-standard channel masks");
    }
  } else if (compression != kRgb) {
    unsupported(path, "compressed BMP");
  }

  std::vector<Rgb8> palette;
  if (bpp == 8) {
    std::uint32_t colors = le32(data, 46);
    if (colors == 0) colors = 256;
    if (colors > 256) corrupt(path, "BMP palette too large");
    const std::size_t at = 14 + dib_size;
    if (data.size() < at + 4 * std::size_t(colors)) corrupt(path, "truncated BMP palette");
    palette.resize(colors);
    for (std::size_t i = 0; i < colors; ++i) {
      palette[i] = Rgb8{data[at + 4 * i + 2], data[at + 4 * i + 1], data[at + 4 * i]};
    }
  }

  const std::uint64_t stride = ((bpp * w + 31) / 32) * 4;
  if (pixel_offset > data.size() || data.size() - pixel_offset < stride * h) {
    corrupt(path, "truncated BMP raster");
  }
  std::vector<Rgb8> pixels(w * h);
  for (std::uint64_t row = 0; row < h; ++row) {
    const std::uint64_t src_row = top_down ? row : h - 1 - row;
    const std::uint8_t* src = data.data() + pixel_offset + src_row * stride;
    Rgb8* dst = pixels.data() + row * w;
    for (std::uint64_t x = 0; x < w; ++x) {
      if (bpp == 8) {
        if (src[x] >= palette.size()) corrupt(path, "BMP palette index out of range");
        dst[x] = palette[src[x]];
      } else {
        const std::uint8_t* p = src + x * (bpp / 8);
        dst[x] = Rgb8{p[2], p[1], p[0]};
      }
    }
  }
  return Frame(w, h, std::move(pixels), path);
}

// --- PNG --------------------------------------------------------------------

struct PngSource {
  const Bytes* data;
  std::size_t pos;
};

struct PngResult {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  std::vector<std::uint8_t> rgb;
  std::string error;
  ErrorKind kind = ErrorKind::Corrupt;
};

void png_read_mem(png_structp png, png_bytep out, png_size_t len) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->data->size() - src->pos < len) png_error(png, "truncated PNG stream");
  std::memcpy(out, src->data->data() + src->pos, len);
  src->pos += len;
}

void png_on_error(png_structp png, png_const_charp msg) {
  auto* result = static_cast<PngResult*>(png_get_error_ptr(png));
  result->error = msg;
  png_longjmp(png, 1);
}

void png_on_warning(png_structp, png_const_charp) {}

// Only trivially destructible locals live between setjmp and any longjmp;
// all mutable state is reached through `result`.
bool png_decode_into(const Bytes& data, PngResult* result) {
  PngSource source{&data, 0};
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, result, png_on_error, png_on_warning);
  if (!png) {
    result->error = "libpng init failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  png_bytep* rows = nullptr;
  if (!info || setjmp(png_jmpbuf(png))) {
    std::free(rows);
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (result->error.empty()) result->error = "libpng init failed";
    return false;
  }
  png_set_read_fn(png, &source, png_read_mem);
  png_read_info(png, info);

  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth != 8 && !(color == PNG_COLOR_TYPE_PALETTE && depth < 8)) {
    result->kind = ErrorKind::BitDepth;
    result->error = "unsupported bit depth: PNG " + std::to_string(depth) + "-bit channels";
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  result->width = png_get_image_width(png, info);
  result->height = png_get_image_height(png, info);
  const std::uint64_t pixels = std::uint64_t(result->width) * result->height;
  if (result->width == 0 || result->height == 0 || pixels > kMaxPixels ||
      png_get_rowbytes(png, info) != std::size_t(result->width) * 3) {
    png_error(png, "unexpected PNG geometry");
  }
  result->rgb.resize(pixels * 3);
  rows = static_cast<png_bytep*>(std::malloc(sizeof(png_bytep) * result->height));
  if (!rows) png_error(png, "out of memory");
  for (png_uint_32 y = 0; y < result->height; ++y) {
    rows[y] = result->rgb.data() + std::size_t(y) * result->width * 3;
  }
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  std::free(rows);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

Frame decode_png(const Bytes& data, const std::string& path) {
  auto result = std::make_unique<PngResult>();
  if (!png_decode_into(data, result.get())) {
    if (result->kind == ErrorKind::BitDepth) throw Error(ErrorKind::BitDepth, path + ": " + result->error);
    corrupt(path, "PNG: " + result->error);
  }
  std::vector<Rgb8> pixels(std::size_t(result->width) * result->height);
  std::memcpy(pixels.data(), result->rgb.data(), result->rgb.size());
  return Frame(result->width, result->height, std::move(pixels), path);
}

// --- JPEG -------------------------------------------------------------------

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_on_error(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_on_message(j_common_ptr, int) {}

struct JpegResult {
  JDIMENSION width = 0;
  JDIMENSION height = 0;
  std::vector<std::uint8_t> rgb;
  std::vector<std::uint8_t> scan;
  std::string error;
  ErrorKind kind = ErrorKind::Corrupt;
};

// Same setjmp discipline as the PNG path.
bool jpeg_decode_into(const Bytes& data, JpegResult* result) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_on_error;
  err.base.emit_message = jpeg_on_message;
  err.message[0] = '\0';
  if (setjmp(err.jump)) {
    result->error = err.message;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data.data(), static_cast<unsigned long>(data.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.data_precision != 8) {
    result->kind = ErrorKind::BitDepth;
    result->error = "unsupported bit depth: JPEG " + std::to_string(cinfo.data_precision) + "-bit samples";
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  const bool gray = cinfo.jpeg_color_space == JCS_GRAYSCALE;
  if (!gray && cinfo.jpeg_color_space != JCS_YCbCr && cinfo.jpeg_color_space != JCS_RGB) {
    result->kind = ErrorKind::UnsupportedFormat;
    result->error = "unsupported format: JPEG color space";
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  cinfo.out_color_space = gray ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  result->width = cinfo.output_width;
  result->height = cinfo.output_height;
  const std::uint64_t pixels = std::uint64_t(result->width) * result->height;
  if (pixels == 0 || pixels > kMaxPixels) {
    result->error = "unexpected JPEG geometry";
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  const int comps = cinfo.output_components;
  result->rgb.resize(pixels * 3);
  result->scan.resize(std::size_t(result->width) * comps);
  while (cinfo.output_scanline < cinfo.output_height) {
    const JDIMENSION y = cinfo.output_scanline;
    JSAMPROW row = result->scan.data();
    jpeg_read_scanlines(&cinfo, &row, 1);
    std::uint8_t* dst = result->rgb.data() + std::size_t(y) * result->width * 3;
    for (JDIMENSION x = 0; x < result->width; ++x) {
      for (int c = 0; c < 3; ++c) dst[3 * x + c] = result->scan[std::size_t(x) * comps + (gray ? 0 : c)];
    }
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

Frame decode_jpeg(const Bytes& data, const std::string& path) {
  auto result = std::make_unique<JpegResult>();
  if (!jpeg_decode_into(data, result.get())) {
    if (result->kind != ErrorKind::Corrupt) throw Error(result->kind, path + ": " + result->error);
    corrupt(path, "JPEG: " + result->error);
  }
  std::vector<Rgb8> pixels(std::size_t(result->width) * result->height);
  std::memcpy(pixels.data(), result->rgb.data(), result->rgb.size());
  return Frame(result->width, result->height, std::move(pixels), path);
}

bool starts_with(const Bytes& d, std::initializer_list<std::uint8_t> magic) {
  if (d.size() < magic.size()) return false;
  return std::equal(magic.begin(), magic.end(), d.begin());
}

}  // namespace

Frame decode_frame(const std::string& path) {
  const Bytes data = read_file(path);
  if (starts_with(data, {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A})) return decode_png(data, path);
  if (starts_with(data, {0xFF, 0xD8, 0xFF})) return decode_jpeg(data, path);
  if (starts_with(data, {'B', 'M'})) return decode_bmp(data, path);
  if (starts_with(data, {'P', '6'}) || starts_with(data, {'P', '5'})) return decode_pnm(data, path);
  unsupported(path, "unrecognized image signature");
}

void write_ppm(const Frame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, path + ": cannot open for writing");
  out << "P6\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  const auto px = frame.pixels();
  out.write(reinterpret_cast<const char*>(px.data()),
            static_cast<std::streamsize>(px.size() * sizeof(Rgb8)));
  if (!out) throw Error(ErrorKind::Io, path + ": write failed");
}

}  // namespace bleedscan
