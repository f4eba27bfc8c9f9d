#include <gtest/gtest.h>

#include <filesystem>
#include <limits>

#include "calsep/errors.hpp"
#include "calsep/matrix_io.hpp"
#include "helpers.hpp"

using namespace calsep;

TEST(MatrixIo, RoundTripIsBitExact) {
  Matrix m = calsep::test::gaussian(5, 3, 1);
  m(0, 0) = 1e-300;
  m(1, 1) = -0.0;
  m(2, 2) = std::numeric_limits<double>::max();
  const auto path = std::filesystem::temp_directory_path() / "calsep_io_roundtrip.csv";
  write_matrix_csv(path, m);
  const Matrix back = read_matrix_csv(path);
  ASSERT_EQ(back.rows(), 5);
  ASSERT_EQ(back.cols(), 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(back(i, j), m(i, j));
  std::filesystem::remove(path);
}

TEST(MatrixIo, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 123456789.125}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
}

TEST(MatrixIo, ParseErrors) {
  EXPECT_EQ(parse_matrix_csv("1,2\n3,4\n").rows(), 2);
  EXPECT_THROW(parse_matrix_csv("1,2\n3\n"), ParseError);
  EXPECT_THROW(parse_matrix_csv("1,abc\n"), ParseError);
  EXPECT_THROW(parse_matrix_csv(""), ParseError);
  EXPECT_THROW(read_matrix_csv("/nonexistent/calsep.csv"), Error);
}
