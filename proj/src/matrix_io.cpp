// Copyright 2026 The WLRA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wlra/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "wlra/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "WLRA v1 I/O assumes a little-endian host");
static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

namespace wlra {
namespace {

constexpr std::size_t kHeaderBytes = 24;
constexpr unsigned char kMagic[4] = {0x57, 0x4C, 0x52, 0x41};  // "WLRA"

[[noreturn]] void format_error_at(const std::string& path, std::size_t byte,
                                  const std::string& what) {
  throw FormatError(path + ": " + what + " (byte " + std::to_string(byte) + ")");
}

void parse_header(const std::string& path, const unsigned char* h, std::size_t avail,
                  std::size_t* rows, std::size_t* cols) {
  if (avail < kHeaderBytes) format_error_at(path, avail, "truncated header");
  if (std::memcmp(h, kMagic, 4) != 0) format_error_at(path, 0, "bad magic");
  if (h[4] != 1) format_error_at(path, 4, "unsupported version " + std::to_string(h[4]));
  if (h[5] != 1) format_error_at(path, 5, "unsupported dtype " + std::to_string(h[5]));
  if (h[6] != 2) format_error_at(path, 6, "unsupported ndim " + std::to_string(h[6]));
  if (h[7] != 0) format_error_at(path, 7, "reserved byte must be 0");
  std::uint64_t r = 0;
  std::uint64_t c = 0;
  std::memcpy(&r, h + 8, 8);
  std::memcpy(&c, h + 16, 8);
  if (r == 0 || c == 0) format_error_at(path, 8, "zero dimension");
  const std::uint64_t max_elems = (std::numeric_limits<std::size_t>::max() - kHeaderBytes) / 8;
  if (c != 0 && r > max_elems / c) format_error_at(path, 8, "dimension overflow");
  *rows = static_cast<std::size_t>(r);
  *cols = static_cast<std::size_t>(c);
}

DenseMatrix read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  unsigned char header[kHeaderBytes];
  in.read(reinterpret_cast<char*>(header), kHeaderBytes);
  const std::size_t got = static_cast<std::size_t>(in.gcount());
  std::size_t rows = 0;
  std::size_t cols = 0;
  parse_header(path, header, got, &rows, &cols);

  std::vector<double> data(rows * cols);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * 8));
  const std::size_t payload = static_cast<std::size_t>(in.gcount());
  if (payload != data.size() * 8) {
    format_error_at(path, kHeaderBytes + payload, "truncated payload");
  }
  char extra;
  if (in.read(&extra, 1)) {
    format_error_at(path, kHeaderBytes + payload, "trailing bytes after payload");
  }
  return DenseMatrix(rows, cols, std::move(data));
}

void write_binary(const DenseMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  unsigned char header[kHeaderBytes] = {};
  std::memcpy(header, kMagic, 4);
  header[4] = 1;
  header[5] = 1;
  header[6] = 2;
  header[7] = 0;
  const std::uint64_t r = m.rows();
  const std::uint64_t c = m.cols();
  std::memcpy(header + 8, &r, 8);
  std::memcpy(header + 16, &c, 8);
  out.write(reinterpret_cast<const char*>(header), kHeaderBytes);
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * 8));
  if (!out) throw IoError(path + ": write failed");
}

DenseMatrix read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t ncols = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    while (true) {
      const char* cell_end = p;
      while (cell_end != end && *cell_end != ',') ++cell_end;
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(p, cell_end, value);
      // Skip surrounding spaces before giving up.
      if (ec != std::errc() || ptr != cell_end) {
        const char* q = p;
        while (q != cell_end && (*q == ' ' || *q == '\t')) ++q;
        const char* qe = cell_end;
        while (qe != q && (qe[-1] == ' ' || qe[-1] == '\t')) --qe;
        auto [ptr2, ec2] = std::from_chars(q, qe, value);
        if (ec2 != std::errc() || ptr2 != qe || q == qe) {
          throw FormatError(path + ": non-numeric cell at line " + std::to_string(lineno) +
                            ", column " + std::to_string(ncols + 1));
        }
      }
      if (!std::isfinite(value)) {
        throw FormatError(path + ": non-finite value at line " + std::to_string(lineno) +
                          ", column " + std::to_string(ncols + 1));
      }
      data.push_back(value);
      ++ncols;
      if (cell_end == end) break;
      p = cell_end + 1;
    }
    if (cols == 0) {
      cols = ncols;
    } else if (ncols != cols) {
      throw FormatError(path + ": line " + std::to_string(lineno) + " has " +
                        std::to_string(ncols) + " cells, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0 || cols == 0) throw FormatError(path + ": empty CSV");
  return DenseMatrix(rows, cols, std::move(data));
}

void write_csv(const DenseMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  char buf[40];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j) out.put(',');
      out << buf;
    }
    out.put('\n');
  }
  if (!out) throw IoError(path + ": write failed");
}

}  // namespace

DenseMatrix read_matrix(const std::string& path, MatrixFormat format) {
  DenseMatrix m =
      format == MatrixFormat::kBinary ? read_binary(path) : read_csv(path);
  if (!m.all_finite()) throw FormatError(path + ": matrix contains non-finite values");
  return m;
}

void write_matrix(const DenseMatrix& m, const std::string& path, MatrixFormat format) {
  if (format == MatrixFormat::kBinary) {
    write_binary(m, path);
  } else {
    write_csv(m, path);
  }
}

void read_matrix_dims(const std::string& path, std::size_t* rows, std::size_t* cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  unsigned char header[kHeaderBytes];
  in.read(reinterpret_cast<char*>(header), kHeaderBytes);
  parse_header(path, header, static_cast<std::size_t>(in.gcount()), rows, cols);
}

MatrixFormat format_for_path(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    return MatrixFormat::kCsv;
  }
  return MatrixFormat::kBinary;
}

}  // namespace wlra
