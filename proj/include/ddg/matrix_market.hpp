#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ddg/dense.hpp"
#include "ddg/sparse.hpp"

namespace ddg::mm {

/// Reads a real/integer/pattern coordinate file. "symmetric" storage is
/// expanded to both triangles and the result is flagged symmetric.
CsrMatrix read_coordinate(std::istream& in);
CsrMatrix read_coordinate(const std::filesystem::path& path);

/// Writes coordinate format. Matrices flagged symmetric are written with
/// "symmetric" storage (lower triangle only).
void write_coordinate(std::ostream& out, const CsrMatrix& a);
void write_coordinate(const std::filesystem::path& path, const CsrMatrix& a);

/// Array (dense, column-major) format.
DenseMatrix read_array(std::istream& in);
DenseMatrix read_array(const std::filesystem::path& path);
void write_array(std::ostream& out, const DenseMatrix& m);
void write_array(const std::filesystem::path& path, const DenseMatrix& m);

/// Vector helpers on top of the array format (one column).
std::vector<double> read_vector(const std::filesystem::path& path);
void write_vector(const std::filesystem::path& path, std::span<const double> v);

}  // namespace ddg::mm
