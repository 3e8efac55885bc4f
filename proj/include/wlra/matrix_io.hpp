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

#pragma once

#include <cstddef>
#include <string>

#include "wlra/matrix.hpp"

namespace wlra {

enum class MatrixFormat { kBinary, kCsv };

// Binary "WLRA v1" layout, little-endian:
//   bytes 0-3   magic "WLRA"
//   byte  4     version = 1
//   byte  5     dtype   = 1 (f64)
//   byte  6     ndim    = 2
//   byte  7     reserved = 0
//   bytes 8-15  rows (u64)
//   bytes 16-23 cols (u64)
//   payload     rows*cols f64, row-major
// Total size is 24 + 8*rows*cols bytes. A binary write -> read round trip is
// bitwise identical.
//
// CSV: one matrix row per line, comma-separated decimal literals, no header.
// Values are written with 17 significant digits, which round-trips doubles.

DenseMatrix read_matrix(const std::string& path, MatrixFormat format);
void write_matrix(const DenseMatrix& m, const std::string& path, MatrixFormat format);

// Reads only rows/cols from a WLRA v1 header.
void read_matrix_dims(const std::string& path, std::size_t* rows, std::size_t* cols);

// Picks the format from the file extension: ".csv" -> CSV, anything else
// -> binary.
MatrixFormat format_for_path(const std::string& path);

}  // namespace wlra
