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

#include <cmath>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "pacdiff/rng.h"

namespace pacdiff {
namespace {

using ::testing::HasSubstr;

class CsvIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("pacdiff_csv_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CsvIoTest, MatrixRoundTripIsExact) {
  Rng rng(1);
  const Tensor m = Gaussian(rng, {5, 3});
  WriteMatrixCsv(dir_ / "m.csv", m);
  EXPECT_EQ(ReadMatrixCsv(dir_ / "m.csv"), m);
}

TEST_F(CsvIoTest, RaggedRowReportsLine) {
  std::ofstream(dir_ / "bad.csv") << "1,2\n3\n";
  try {
    ReadMatrixCsv(dir_ / "bad.csv");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_THAT(e.what(), HasSubstr(":2"));
  }
}

TEST_F(CsvIoTest, NonNumericReportsLine) {
  std::ofstream(dir_ / "bad.csv") << "1,2\n3,abc\n";
  EXPECT_THROW(ReadMatrixCsv(dir_ / "bad.csv"), FormatError);
}

TEST_F(CsvIoTest, PgmRoundTripOfQuantizedImage) {
  Tensor img({4, 5});
  for (std::size_t i = 0; i < img.size(); ++i)
    img[i] = QuantizePixel(static_cast<double>(i) / 19.0);
  WritePgm(dir_ / "a.pgm", img);
  EXPECT_EQ(ReadPgm(dir_ / "a.pgm"), img);
}

TEST_F(CsvIoTest, TruncatedPgmRejected) {
  std::ofstream(dir_ / "t.pgm", std::ios::binary) << "P5\n4 4\n255\nabc";
  EXPECT_THROW(ReadPgm(dir_ / "t.pgm"), FormatError);
}

TEST(ParseDoubleTest, AcceptsInfinity) {
  EXPECT_TRUE(std::isinf(ParseDouble("inf", "x")));
  EXPECT_EQ(ParseDouble("-2.5", "x"), -2.5);
  EXPECT_THROW(ParseDouble("2.5x", "x"), FormatError);
}

TEST(QuantizeTest, ClampsAndRounds) {
  EXPECT_EQ(QuantizePixel(-1.0), 0.0);
  EXPECT_EQ(QuantizePixel(2.0), 1.0);
  EXPECT_EQ(QuantizePixel(0.5), 128.0 / 255.0);
}

}  // namespace
}  // namespace pacdiff
