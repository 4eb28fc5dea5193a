#include "domino/dom1.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace domino::dom1 {

namespace {

constexpr std::size_t kMaxHeaderBytes = 4096;
constexpr std::size_t kMaxDims = 8;

[[noreturn]] void parse_fail(std::streamoff offset, const std::string& what) {
  fail(ErrorKind::Parse,
       "DOM1 at byte " + std::to_string(offset) + ": " + what);
}

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void expect_shape(const Tensor& t, DType dtype, std::size_t ndim,
                  const char* what) {
  if (t.dtype != dtype || t.shape.size() != ndim) {
    fail(ErrorKind::Shape, std::string("DOM1 tensor is not a ") + what);
  }
}

int as_int_dim(std::size_t d) {
  if (d == 0 || d > (1u << 20)) fail(ErrorKind::Shape, "implausible grid dimension");
  return static_cast<int>(d);
}

}  // namespace

std::size_t Tensor::element_count() const { return product(shape); }

void write(std::ostream& out, const Tensor& t) {
  std::string header = t.dtype == DType::U8 ? "DOM1 u8 " : "DOM1 f64 ";
  header += std::to_string(t.shape.size());
  for (auto d : t.shape) header += " " + std::to_string(d);
  header += "\n";
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  const std::size_t n = t.element_count();
  if (t.dtype == DType::U8) {
    if (t.u8.size() != n) fail(ErrorKind::Shape, "u8 payload does not match shape");
    out.write(reinterpret_cast<const char*>(t.u8.data()),
              static_cast<std::streamsize>(n));
  } else {
    if (t.f64.size() != n) fail(ErrorKind::Shape, "f64 payload does not match shape");
    std::vector<char> bytes(n * 8);
    for (std::size_t i = 0; i < n; ++i) {
      auto bits = std::bit_cast<std::uint64_t>(t.f64[i]);
      for (int b = 0; b < 8; ++b) {
        bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
      }
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) fail(ErrorKind::Io, "failed writing DOM1 tensor");
}

Tensor read(std::istream& in) {
  const std::streamoff start = in.tellg() < 0 ? 0 : static_cast<std::streamoff>(in.tellg());
  std::string header;
  char ch = 0;
  while (in.get(ch) && ch != '\n') {
    header.push_back(ch);
    if (header.size() > kMaxHeaderBytes) parse_fail(start, "header line too long");
  }
  if (ch != '\n') parse_fail(start + static_cast<std::streamoff>(header.size()),
                             "missing header terminator");

  std::istringstream fields(header);
  std::string magic, dtype;
  std::size_t ndim = 0;
  if (!(fields >> magic) || magic != "DOM1") parse_fail(start, "bad magic");
  if (!(fields >> dtype)) parse_fail(start, "missing dtype");
  Tensor t;
  if (dtype == "u8") {
    t.dtype = DType::U8;
  } else if (dtype == "f64") {
    t.dtype = DType::F64;
  } else {
    parse_fail(start, "unknown dtype '" + dtype + "'");
  }
  if (!(fields >> ndim) || ndim == 0 || ndim > kMaxDims) {
    parse_fail(start, "bad dimension count");
  }
  for (std::size_t i = 0; i < ndim; ++i) {
    std::size_t d = 0;
    if (!(fields >> d)) parse_fail(start, "missing dimension " + std::to_string(i));
    t.shape.push_back(d);
  }
  std::string extra;
  if (fields >> extra) parse_fail(start, "trailing header content");

  const std::streamoff payload = start + static_cast<std::streamoff>(header.size()) + 1;
  const std::size_t n = t.element_count();
  if (n > (std::size_t{1} << 32)) parse_fail(payload, "tensor too large");
  if (t.dtype == DType::U8) {
    t.u8.resize(n);
    in.read(reinterpret_cast<char*>(t.u8.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
      parse_fail(payload + in.gcount(), "truncated u8 payload");
    }
  } else {
    std::vector<unsigned char> bytes(n * 8);
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
      parse_fail(payload + in.gcount(), "truncated f64 payload");
    }
    t.f64.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) {
        bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
      }
      t.f64[i] = std::bit_cast<double>(bits);
    }
  }
  return t;
}

Tensor to_tensor(const LabelMap& m) {
  Tensor t;
  t.dtype = DType::U8;
  t.shape = {static_cast<std::size_t>(m.height()), static_cast<std::size_t>(m.width())};
  t.u8.assign(m.data().begin(), m.data().end());
  return t;
}

Tensor to_tensor(const ProbMap& m) {
  Tensor t;
  t.shape = {static_cast<std::size_t>(m.height()), static_cast<std::size_t>(m.width()),
             m.num_classes()};
  t.f64.assign(m.data().begin(), m.data().end());
  return t;
}

Tensor to_tensor(const DenseMatrix& m) {
  Tensor t;
  t.shape = {m.rows(), m.cols()};
  t.f64.assign(m.data().begin(), m.data().end());
  return t;
}

Tensor to_tensor(const Image& m) {
  Tensor t;
  t.shape = {static_cast<std::size_t>(m.height()), static_cast<std::size_t>(m.width())};
  t.f64.assign(m.data().begin(), m.data().end());
  return t;
}

LabelMap to_label_map(const Tensor& t, std::size_t num_classes) {
  expect_shape(t, DType::U8, 2, "u8 label map");
  return LabelMap(as_int_dim(t.shape[1]), as_int_dim(t.shape[0]), num_classes, t.u8);
}

ProbMap to_prob_map(const Tensor& t) {
  expect_shape(t, DType::F64, 3, "f64 probability map");
  return ProbMap(as_int_dim(t.shape[1]), as_int_dim(t.shape[0]), t.shape[2], t.f64);
}

DenseMatrix to_matrix(const Tensor& t) {
  expect_shape(t, DType::F64, 2, "f64 matrix");
  return DenseMatrix(t.shape[0], t.shape[1], t.f64);
}

Image to_image(const Tensor& t) {
  expect_shape(t, DType::F64, 2, "f64 image");
  return Image(as_int_dim(t.shape[1]), as_int_dim(t.shape[0]), t.f64);
}

void save(const std::filesystem::path& path, const Tensor& t) {
  std::ostringstream out(std::ios::binary);
  write(out, t);
  write_file_atomic(path, out.str());
}

Tensor load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  try {
    return read(in);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace domino::dom1

namespace domino::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix(std::ostream& out, const DenseMatrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

void save_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ostringstream out;
  write_matrix(out, m);
  write_file_atomic(path, out.str());
}

DenseMatrix read_matrix(std::istream& in) {
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t count = 0;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                     : comma - pos);
      auto first = cell.find_first_not_of(" \t");
      auto last = cell.find_last_not_of(" \t");
      if (first == std::string::npos) {
        fail(ErrorKind::Parse, "CSV line " + std::to_string(line_no) + ": empty cell");
      }
      cell = cell.substr(first, last - first + 1);
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size() || !std::isfinite(v)) {
        fail(ErrorKind::Parse, "CSV line " + std::to_string(line_no) + ": bad number '" +
                                   cell + "'");
      }
      data.push_back(v);
      ++count;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      fail(ErrorKind::Parse, "CSV line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(cols) + " columns, found " +
                                 std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) fail(ErrorKind::Parse, "CSV matrix is empty");
  return DenseMatrix(rows, cols, std::move(data));
}

DenseMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  try {
    return read_matrix(in);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace domino::csv

namespace domino {

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorKind::Io, "cannot write " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace domino
