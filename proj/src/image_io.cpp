#include "svsnltv/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

namespace svsnltv {
namespace {

using Bytes = std::vector<std::uint8_t>;

Bytes read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileAccessError("cannot open '" + path.string() + "' for reading");
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw FileAccessError("read failure on '" + path.string() + "'");
  return data;
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

// --- PPM -------------------------------------------------------------------

class PpmHeaderReader {
public:
  PpmHeaderReader(const Bytes& data, const std::string& name) : data_(data), name_(name) {}

  long next_number() {
    skip_space_and_comments();
    if (pos_ >= data_.size() || !std::isdigit(data_[pos_])) {
      throw CorruptFileError("malformed PPM header in '" + name_ + "'");
    }
    long v = 0;
    while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
      v = v * 10 + (data_[pos_] - '0');
      if (v > 1'000'000'000L) throw CorruptFileError("PPM header value too large in '" + name_ + "'");
      ++pos_;
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= data_.size() || !std::isspace(data_[pos_])) {
      throw CorruptFileError("missing separator after PPM header in '" + name_ + "'");
    }
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
  const std::string& name_;
  std::size_t pos_ = 2;
};

ColorImage decode_ppm(const Bytes& data, const std::string& name) {
  PpmHeaderReader header(data, name);
  const long width = header.next_number();
  const long height = header.next_number();
  const long maxval = header.next_number();
  if (width < 1 || height < 1) throw CorruptFileError("PPM '" + name + "' has zero dimension");
  if (maxval != 255) {
    throw UnsupportedFormatError("PPM '" + name + "' has maxval " + std::to_string(maxval) +
                                 "; only 255 is supported");
  }
  const std::size_t offset = header.raster_offset();
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (data.size() < offset + 3 * n) throw CorruptFileError("PPM '" + name + "' is truncated");

  ColorImage img(static_cast<int>(height), static_cast<int>(width));
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      img.plane(c)[i] = data[offset + 3 * i + static_cast<std::size_t>(c)] / 255.0;
    }
  }
  return img;
}

void write_ppm(const ColorImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileAccessError("cannot open '" + path.string() + "' for writing");
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  Bytes raster(3 * img.pixel_count());
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) raster[3 * i + static_cast<std::size_t>(c)] = quantize(img.plane(c)[i]);
  }
  out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (!out) throw FileAccessError("write failure on '" + path.string() + "'");
}

// --- PNG -------------------------------------------------------------------

constexpr std::array<std::uint8_t, 8> kPngSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

ColorImage decode_png(const Bytes& data, const std::string& name) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, data.data(), data.size())) {
    throw CorruptFileError("PNG '" + name + "': " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw UnsupportedFormatError("PNG '" + name + "' is 16-bit; only 8-bit is supported");
  }
  image.format = PNG_FORMAT_RGB;
  Bytes buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw CorruptFileError("PNG '" + name + "': " + message);
  }
  ColorImage img(static_cast<int>(image.height), static_cast<int>(image.width));
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) img.plane(c)[i] = buffer[3 * i + static_cast<std::size_t>(c)] / 255.0;
  }
  return img;
}

void write_png(const ColorImage& img, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  Bytes raster(3 * img.pixel_count());
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) raster[3 * i + static_cast<std::size_t>(c)] = quantize(img.plane(c)[i]);
  }
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, raster.data(), 0, nullptr)) {
    throw FileAccessError("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

}  // namespace

ColorImage load_image(const std::filesystem::path& path) {
  const Bytes data = read_all(path);
  const std::string name = path.string();
  if (data.size() >= kPngSignature.size() &&
      std::equal(kPngSignature.begin(), kPngSignature.end(), data.begin())) {
    return decode_png(data, name);
  }
  if (data.size() >= 2 && data[0] == 'P' && data[1] == '6') return decode_ppm(data, name);
  throw UnsupportedFormatError("'" + name + "' is neither PNG nor binary PPM (P6)");
}

void save_image(const ColorImage& img, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_png(img, path);
  } else if (ext == ".ppm" || ext == ".pnm") {
    write_ppm(img, path);
  } else {
    throw UnsupportedFormatError("cannot infer output format from extension of '" + path.string() +
                                 "' (use .png or .ppm)");
  }
}

ColorImage quantize_8bit(const ColorImage& img) {
  ColorImage out = img;
  for (int c = 0; c < 3; ++c) {
    for (double& v : out.plane(c).values()) v = quantize(v) / 255.0;
  }
  return out;
}

}  // namespace svsnltv
