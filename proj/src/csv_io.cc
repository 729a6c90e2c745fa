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

#include "pacdiff/csv_io.h"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pacdiff {
namespace {

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string StripCr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::ofstream OpenForWrite(const std::filesystem::path& path,
                           std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  return out;
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseDouble(const std::string& text, const std::string& where) {
  std::string s = text;
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  if (s == "inf" || s == "+inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError(where + ": not a number: '" + text + "'");
  return v;
}

void WriteMatrixCsv(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out = OpenForWrite(path);
  const std::size_t rows = t.rank() <= 1 ? t.size() : t.rows();
  const std::size_t cols = t.rank() <= 1 ? 1 : t.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out << ',';
      out << FormatDouble(t[r * cols + c]);
    }
    out << '\n';
  }
}

Tensor ReadMatrixCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = StripCr(line);
    if (line.empty()) continue;
    const auto cells = SplitLine(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (rows == 0) {
      cols = cells.size();
    } else if (cells.size() != cols) {
      throw FormatError(where + ": expected " + std::to_string(cols) +
                        " columns, found " + std::to_string(cells.size()));
    }
    for (const auto& c : cells) data.push_back(ParseDouble(c, where));
    ++rows;
  }
  if (rows == 0) throw FormatError(path.string() + ": empty matrix file");
  return Tensor({rows, cols}, std::move(data));
}

CsvTable ReadCsvTable(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = StripCr(line);
    if (line.empty()) continue;
    auto cells = SplitLine(line);
    if (first && has_header) {
      table.header = std::move(cells);
    } else {
      table.rows.push_back(std::move(cells));
    }
    first = false;
  }
  return table;
}

void WriteCsvTable(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out = OpenForWrite(path);
  auto write_row = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  if (!table.header.empty()) write_row(table.header);
  for (const auto& r : table.rows) write_row(r);
}

double QuantizePixel(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return std::round(clamped * 255.0) / 255.0;
}

void WritePgm(const std::filesystem::path& path, const Tensor& image) {
  std::size_t h = 0;
  std::size_t w = 0;
  if (image.rank() == 2) {
    h = image.rows();
    w = image.cols();
  } else {
    const auto side =
        static_cast<std::size_t>(std::llround(std::sqrt(image.size())));
    if (image.rank() != 1 || side * side != image.size()) {
      throw std::invalid_argument("WritePgm: cannot infer image size from " +
                                  image.ShapeString());
    }
    h = w = side;
  }
  std::ofstream out = OpenForWrite(path, std::ios::binary);
  out << "P5\n" << w << ' ' << h << "\n255\n";
  for (double v : image.data()) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(
        std::lround(clamped * 255.0))));
  }
}

Tensor ReadPgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) -> FormatError {
    return FormatError(path.string() + ": byte " + std::to_string(pos) +
                       ": " + what);
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> std::size_t {
    skip_space();
    const std::size_t start = pos;
    while (pos < bytes.size() &&
           std::isdigit(static_cast<unsigned char>(bytes[pos])))
      ++pos;
    if (start == pos) throw fail("expected an integer");
    return std::stoul(bytes.substr(start, pos - start));
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw fail("missing P5 magic");
  pos = 2;
  const std::size_t w = read_int();
  const std::size_t h = read_int();
  const std::size_t maxval = read_int();
  if (maxval != 255) throw fail("maxval must be 255");
  if (w == 0 || h == 0) throw fail("zero image dimension");
  if (pos >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw fail("expected whitespace before raster");
  ++pos;
  if (bytes.size() - pos < w * h) throw fail("truncated raster");
  Tensor image({h, w});
  for (std::size_t i = 0; i < w * h; ++i)
    image[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  return image;
}

}  // namespace pacdiff
