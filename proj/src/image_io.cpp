#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "densereg/tensor_io.hpp"

namespace densereg {

namespace {

bool has_png_signature(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  unsigned char sig[8] = {};
  is.read(reinterpret_cast<char*>(sig), 8);
  return is.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

ImageBuffer load_png(const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw FormatError("PNG '" + path + "': " + image.message);
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw FormatError("PNG '" + path + "': unsupported bit depth (only 8-bit supported)");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<png_byte> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr))
    throw FormatError("PNG '" + path + "': " + image.message);
  ImageBuffer img(static_cast<int>(image.width), static_cast<int>(image.height), channels);
  std::transform(raw.begin(), raw.end(), img.samples.begin(), [](png_byte b) { return b / 255.0f; });
  return img;
}

// Skips whitespace and '#' comments between PNM header tokens.
int read_pnm_int(const std::vector<char>& buf, std::size_t& pos, const std::string& path) {
  for (;;) {
    while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= buf.size() || !std::isdigit(static_cast<unsigned char>(buf[pos])))
    throw FormatError("PNM '" + path + "': malformed header");
  long v = 0;
  while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) {
    v = v * 10 + (buf[pos++] - '0');
    if (v > (1 << 24)) throw FormatError("PNM '" + path + "': header value too large");
  }
  return static_cast<int>(v);
}

ImageBuffer load_pnm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open image '" + path + "'");
  std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '5' && buf[1] != '6'))
    throw FormatError("image '" + path + "': not a PNG or binary PGM/PPM file");
  const int channels = buf[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  const int w = read_pnm_int(buf, pos, path);
  const int h = read_pnm_int(buf, pos, path);
  const int maxval = read_pnm_int(buf, pos, path);
  if (maxval != 255)
    throw FormatError("PNM '" + path + "': unsupported bit depth (maxval " + std::to_string(maxval) + ")");
  ++pos;  // single whitespace before raster
  const std::size_t n = static_cast<std::size_t>(w) * h * channels;
  if (w < 1 || h < 1) throw FormatError("PNM '" + path + "': empty image");
  if (buf.size() < pos + n) throw LengthError("PNM '" + path + "': truncated raster");
  ImageBuffer img(w, h, channels);
  for (std::size_t i = 0; i < n; ++i) img.samples[i] = static_cast<unsigned char>(buf[pos + i]) / 255.0f;
  return img;
}

std::vector<png_byte> to_bytes(const ImageBuffer& img) {
  std::vector<png_byte> raw(img.samples.size());
  std::transform(img.samples.begin(), img.samples.end(), raw.begin(), [](float v) {
    return static_cast<png_byte>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  });
  return raw;
}

}  // namespace

ImageBuffer load_image(const std::string& path) {
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open image '" + path + "'");
  }
  return has_png_signature(path) ? load_png(path) : load_pnm(path);
}

void save_png(const ImageBuffer& img, const std::string& path) {
  img.validate();
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const auto raw = to_bytes(img);
  if (!png_image_write_to_file(&image, path.c_str(), 0, raw.data(), 0, nullptr))
    throw IoError("PNG write '" + path + "': " + image.message);
}

void save_pnm(const ImageBuffer& img, const std::string& path) {
  img.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << (img.channels == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
  const auto raw = to_bytes(img);
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw IoError("failed writing '" + path + "'");
}

}  // namespace densereg
