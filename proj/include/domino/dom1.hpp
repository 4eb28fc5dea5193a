#pragma once

// DOM1 dense tensor files: an ASCII header line
//
//   DOM1 <u8|f64> <ndim> <dim0> <dim1> ...\n
//
// followed by the raw little-endian payload in row-major order.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "domino/core.hpp"

namespace domino::dom1 {

enum class DType { U8, F64 };

struct Tensor {
  DType dtype = DType::F64;
  std::vector<std::size_t> shape;
  std::vector<std::uint8_t> u8;
  std::vector<double> f64;

  std::size_t element_count() const;
};

void write(std::ostream& out, const Tensor& t);
// Parse errors report the byte offset within the stream.
Tensor read(std::istream& in);

Tensor to_tensor(const LabelMap& m);
Tensor to_tensor(const ProbMap& m);
Tensor to_tensor(const DenseMatrix& m);
Tensor to_tensor(const Image& m);

LabelMap to_label_map(const Tensor& t, std::size_t num_classes);
ProbMap to_prob_map(const Tensor& t);
DenseMatrix to_matrix(const Tensor& t);
Image to_image(const Tensor& t);

void save(const std::filesystem::path& path, const Tensor& t);
Tensor load(const std::filesystem::path& path);

}  // namespace domino::dom1

namespace domino::csv {

// Headerless, comma-separated, one matrix row per line. Values are written
// with 17 significant digits so reading back is bit-exact.
void write_matrix(std::ostream& out, const DenseMatrix& m);
void save_matrix(const std::filesystem::path& path, const DenseMatrix& m);
// Rejects ragged rows and unparsable cells, naming the line.
DenseMatrix read_matrix(std::istream& in);
DenseMatrix load_matrix(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace domino::csv

namespace domino {

// Writes to a temporary sibling, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace domino
