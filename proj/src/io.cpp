#include "tvd/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace tvd {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n' && c != '\r') {
      }
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

long header_number(std::istream& in, const char* what) {
  const std::string tok = header_token(in);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw FormatError(std::string("malformed PGM header: bad ") + what + " '" + tok + "'");
  }
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
  const std::string magic = header_token(in);
  if (magic != "P2" && magic != "P5") throw FormatError("not a PGM file (magic '" + magic + "')");
  const bool binary = magic == "P5";
  const long width = header_number(in, "width");
  const long height = header_number(in, "height");
  const long maxval = header_number(in, "maxval");
  if (width < 1 || height < 1) throw FormatError("PGM dimensions must be positive");
  if (maxval < 1 || maxval > 65535) throw FormatError("PGM maxval must lie in [1, 65535]");

  GrayImage g{Image(height, width), static_cast<int>(maxval)};
  const double scale = 1.0 / static_cast<double>(maxval);
  for (long j = 1; j <= height; ++j) {
    for (long k = 1; k <= width; ++k) {
      long v = 0;
      if (binary) {
        const int hi = in.get();
        const int lo = maxval > 255 ? in.get() : 0;
        if (!in) throw FormatError("PGM raster is truncated");
        v = maxval > 255 ? (hi << 8) | lo : hi;
      } else {
        const std::string tok = header_token(in);
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty()) throw FormatError("PGM raster is truncated");
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
          throw FormatError("malformed PGM sample '" + tok + "'");
        }
      }
      if (v < 0 || v > maxval) throw FormatError("PGM sample " + std::to_string(v) + " exceeds maxval");
      g.pixels(j, k) = static_cast<double>(v) * scale;
    }
  }
  return g;
}

GrayImage read_pgm_file(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_pgm(in);
}

void write_pgm(std::ostream& out, const Image& pixels, int maxval, bool binary) {
  if (maxval < 1 || maxval > 65535) throw FormatError("PGM maxval must lie in [1, 65535]");
  out << (binary ? "P5" : "P2") << '\n' << pixels.cols() << ' ' << pixels.rows() << '\n' << maxval << '\n';
  for (Index j = 1; j <= pixels.rows(); ++j) {
    for (Index k = 1; k <= pixels.cols(); ++k) {
      const double x = std::isfinite(pixels(j, k)) ? std::clamp(pixels(j, k), 0.0, 1.0) : 0.0;
      const long v = std::lround(x * maxval);
      if (binary) {
        if (maxval > 255) out.put(static_cast<char>((v >> 8) & 0xff));
        out.put(static_cast<char>(v & 0xff));
      } else {
        out << v << (k == pixels.cols() ? '\n' : ' ');
      }
    }
  }
  if (!out) throw FormatError("failed to write PGM data");
}

void write_pgm_file(const std::string& path, const Image& pixels, int maxval, bool binary) {
  std::ofstream out = open_out(path);
  write_pgm(out, pixels, maxval, binary);
}

Image read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t");
      const auto last = cell.find_last_not_of(" \t");
      const std::string t = first == std::string::npos ? "" : cell.substr(first, last - first + 1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw FormatError("line " + std::to_string(line_no) + ": bad number '" + t + "'");
      }
      row.push_back(v);
    }
    if (line.back() == ',') throw FormatError("line " + std::to_string(line_no) + ": trailing comma");
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(rows.front().size()) +
                        " values, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("CSV file holds no data");
  Image f(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t k = 0; k < rows[j].size(); ++k) f(j + 1, k + 1) = rows[j][k];
  return f;
}

Image read_csv_file(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_csv(in);
}

void write_csv(std::ostream& out, const Image& f) {
  out.precision(17);
  for (Index j = 1; j <= f.rows(); ++j) {
    for (Index k = 1; k <= f.cols(); ++k) out << f(j, k) << (k == f.cols() ? '\n' : ',');
  }
  if (!out) throw FormatError("failed to write CSV data");
}

void write_csv_file(const std::string& path, const Image& f) {
  std::ofstream out = open_out(path);
  write_csv(out, f);
}

}  // namespace tvd
