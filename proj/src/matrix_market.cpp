#include "ddg/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

namespace ddg::mm {

namespace {

struct Banner {
  std::string format;    // coordinate | array
  std::string field;     // real | integer | pattern
  std::string symmetry;  // general | symmetric
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Banner read_banner(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("matrix market: empty input");
  std::istringstream ss(line);
  std::string tag, object;
  Banner b;
  ss >> tag >> object >> b.format >> b.field >> b.symmetry;
  if (tag != "%%MatrixMarket" || lower(object) != "matrix") {
    throw ParseError("matrix market: missing %%MatrixMarket matrix banner");
  }
  b.format = lower(b.format);
  b.field = lower(b.field);
  b.symmetry = lower(b.symmetry);
  if (b.format != "coordinate" && b.format != "array") {
    throw ParseError("matrix market: unsupported format '" + b.format + "'");
  }
  if (b.field != "real" && b.field != "integer" && b.field != "pattern" && b.field != "double") {
    throw ParseError("matrix market: unsupported field '" + b.field + "'");
  }
  if (b.symmetry != "general" && b.symmetry != "symmetric") {
    throw ParseError("matrix market: unsupported symmetry '" + b.symmetry + "'");
  }
  return b;
}

// Next line that is neither a comment nor blank.
std::string next_data_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%') continue;
    return line;
  }
  throw ParseError("matrix market: unexpected end of input");
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace

CsrMatrix read_coordinate(std::istream& in) {
  const Banner b = read_banner(in);
  if (b.format != "coordinate") throw ParseError("matrix market: expected coordinate format");
  std::istringstream header(next_data_line(in));
  Index nrows = 0, ncols = 0, nnz = 0;
  if (!(header >> nrows >> ncols >> nnz)) throw ParseError("matrix market: bad size line");
  const bool symmetric = b.symmetry == "symmetric";
  if (symmetric && nrows != ncols) throw ParseError("matrix market: symmetric storage on non-square");
  std::vector<Triplet> trips;
  trips.reserve(symmetric ? 2 * nnz : nnz);
  for (Index k = 0; k < nnz; ++k) {
    std::istringstream ls(next_data_line(in));
    Index i = 0, j = 0;
    double v = 1.0;
    if (!(ls >> i >> j)) throw ParseError("matrix market: bad entry line " + std::to_string(k + 1));
    if (b.field != "pattern" && !(ls >> v)) {
      throw ParseError("matrix market: missing value on entry " + std::to_string(k + 1));
    }
    if (i < 1 || i > nrows || j < 1 || j > ncols) {
      throw ParseError("matrix market: entry " + std::to_string(k + 1) + " out of range");
    }
    trips.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) trips.push_back({j - 1, i - 1, v});
  }
  return CsrMatrix::from_triplets(nrows, ncols, trips, symmetric);
}

CsrMatrix read_coordinate(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_coordinate(in);
}

void write_coordinate(std::ostream& out, const CsrMatrix& a) {
  const bool sym = a.is_symmetric();
  Index count = 0;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j : a.row_cols(i)) count += !sym || j <= i;
  }
  out << "%%MatrixMarket matrix coordinate real " << (sym ? "symmetric" : "general") << "\n";
  out << a.rows() << " " << a.cols() << " " << count << "\n";
  const auto old_prec = out.precision(17);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (sym && cols[k] > i) continue;
      out << i + 1 << " " << cols[k] + 1 << " " << vals[k] << "\n";
    }
  }
  out.precision(old_prec);
}

void write_coordinate(const std::filesystem::path& path, const CsrMatrix& a) {
  auto out = open_out(path);
  write_coordinate(out, a);
}

DenseMatrix read_array(std::istream& in) {
  const Banner b = read_banner(in);
  if (b.format != "array") throw ParseError("matrix market: expected array format");
  if (b.field == "pattern") throw ParseError("matrix market: pattern field invalid for arrays");
  std::istringstream header(next_data_line(in));
  Index nrows = 0, ncols = 0;
  if (!(header >> nrows >> ncols)) throw ParseError("matrix market: bad array size line");
  const bool symmetric = b.symmetry == "symmetric";
  DenseMatrix m(nrows, ncols);
  for (Index j = 0; j < ncols; ++j) {
    for (Index i = symmetric ? j : 0; i < nrows; ++i) {
      std::istringstream ls(next_data_line(in));
      double v = 0.0;
      if (!(ls >> v)) throw ParseError("matrix market: bad array value");
      m(i, j) = v;
      if (symmetric) m(j, i) = v;
    }
  }
  return m;
}

DenseMatrix read_array(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_array(in);
}

void write_array(std::ostream& out, const DenseMatrix& m) {
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << " " << m.cols() << "\n";
  const auto old_prec = out.precision(17);
  for (double v : m.values()) out << v << "\n";
  out.precision(old_prec);
}

void write_array(const std::filesystem::path& path, const DenseMatrix& m) {
  auto out = open_out(path);
  write_array(out, m);
}

std::vector<double> read_vector(const std::filesystem::path& path) {
  const DenseMatrix m = read_array(path);
  if (m.cols() != 1) throw ParseError(path.string() + ": expected a single column");
  return {m.values().begin(), m.values().end()};
}

void write_vector(const std::filesystem::path& path, std::span<const double> v) {
  write_array(path, DenseMatrix(static_cast<Index>(v.size()), 1, {v.begin(), v.end()}));
}

}  // namespace ddg::mm
