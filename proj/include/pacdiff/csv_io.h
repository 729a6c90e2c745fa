// Copyright 2026 The pacdiff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Tensor serialization: CSV for matrices, binary PGM (P5) for images.
//
// CSV: one line per leading-dimension slice, comma separated, '.' decimal
// separator, values printed with 17 significant digits so that reading a
// file back reproduces every double exactly. No header.
//
// PGM: P5, maxval 255. Values are clamped to [0, 1] and rounded to the
// nearest of the 256 levels; reading returns level / 255.0.

#ifndef PACDIFF_CSV_IO_H_
#define PACDIFF_CSV_IO_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacdiff/tensor.h"

namespace pacdiff {

// Malformed input file. The message carries the path and a line (CSV) or
// byte offset (PGM).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string FormatDouble(double v);

void WriteMatrixCsv(const std::filesystem::path& path, const Tensor& t);
// Reads a rectangular numeric CSV as a [rows, cols] matrix.
Tensor ReadMatrixCsv(const std::filesystem::path& path);

// Generic text table: optional header row plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable ReadCsvTable(const std::filesystem::path& path, bool has_header);
void WriteCsvTable(const std::filesystem::path& path, const CsvTable& table);

// `image` must be rank 2 ([height, width]) or rank 1 of a square length.
void WritePgm(const std::filesystem::path& path, const Tensor& image);
Tensor ReadPgm(const std::filesystem::path& path);

// Quantizes to the 256 PGM levels exactly as WritePgm does.
double QuantizePixel(double v);

double ParseDouble(const std::string& text, const std::string& where);

}  // namespace pacdiff

#endif  // PACDIFF_CSV_IO_H_
