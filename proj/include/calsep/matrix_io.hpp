#pragma once

// Headerless CSV matrices, one row per line, 17 significant digits.

#include <filesystem>
#include <string>

#include "calsep/numerics.hpp"

namespace calsep {

std::string format_double(double x);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

Matrix parse_matrix_csv(const std::string& text);

}  // namespace calsep
