#pragma once

#include <filesystem>
#include <stdexcept>

#include "svsnltv/image.hpp"

namespace svsnltv {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The file could not be opened, read or written.
class FileAccessError : public IoError {
public:
  using IoError::IoError;
};

/// The file is readable but neither an 8-bit PNG nor a binary PPM (P6, maxval 255).
class UnsupportedFormatError : public IoError {
public:
  using IoError::IoError;
};

/// The signature matched but the header or payload is malformed or truncated.
class CorruptFileError : public IoError {
public:
  using IoError::IoError;
};

/// Loads an 8-bit PNG (gray, RGB, with or without alpha; alpha is dropped) or
/// a binary P6 PPM. Codes map to value / 255. Format is detected from the
/// file signature, not the extension.
ColorImage load_image(const std::filesystem::path& path);

/// Writes a PNG when the extension is ".png", a P6 PPM when it is ".ppm" or
/// ".pnm". Samples are clamped to [0,1] and quantized as round(255 v).
void save_image(const ColorImage& img, const std::filesystem::path& path);

/// The samples save_image would store, read back: round(255 clamp(v)) / 255.
ColorImage quantize_8bit(const ColorImage& img);

}  // namespace svsnltv
