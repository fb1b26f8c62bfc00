#pragma once

#include <iosfwd>
#include <string>

#include "tvd/image.hpp"

namespace tvd {

// A grayscale raster scaled to [0, 1] by its maxval. Rows of the file are the
// first image index.
struct GrayImage {
  Image pixels;
  int maxval = 255;
};

// Plain (P2) or binary (P5) portable graymap, maxval 1..65535. Binary samples
// are one byte below 256 and two big-endian bytes otherwise. Throws FormatError.
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm_file(const std::string& path);

// Values are clamped to [0, 1] and rounded to the nearest level.
void write_pgm(std::ostream& out, const Image& pixels, int maxval = 255, bool binary = true);
void write_pgm_file(const std::string& path, const Image& pixels, int maxval = 255, bool binary = true);

// Comma-separated numbers, one image row per line, no header. Blank trailing
// lines are ignored; ragged rows raise FormatError.
Image read_csv(std::istream& in);
Image read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const Image& f);
void write_csv_file(const std::string& path, const Image& f);

}  // namespace tvd
