#pragma once

#include <string>

#include "jpegrad/image.hpp"

namespace jpegrad {

/// Reads any PNG as 8-bit RGB and scales to [0,1]. Throws IoError.
ImageTensor load_png(const std::string& path);

/// Writes 8-bit RGB PNG; values are clamped to [0,1] and quantized with
/// round-half-away-from-zero. The file appears atomically (temp + rename).
void save_png(const std::string& path, const ImageTensor& img);

/// Atomic text-file write (temp + rename), used for all CSV outputs.
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace jpegrad
