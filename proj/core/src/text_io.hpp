#pragma once

// Helpers for the versioned whitespace-separated model files.

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "enose/kv_config.hpp"
#include "enose/linalg.hpp"

namespace enose::detail {

inline void expect_token(std::istream& in, const std::string& want) {
  std::string got;
  if (!(in >> got) || got != want)
    throw std::runtime_error("model file: expected '" + want + "', found '" + got + "'");
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if constexpr (std::is_same_v<T, double>) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error(std::string("model file: missing ") + what);
    v = parse_double(tok);
  } else {
    if (!(in >> v)) throw std::runtime_error(std::string("model file: missing ") + what);
  }
  return v;
}

inline void write_vector(std::ostream& out, const std::string& tag, const std::vector<double>& v) {
  out << tag << ' ' << v.size();
  for (double x : v) out << ' ' << format_double(x);
  out << '\n';
}

inline std::vector<double> read_vector(std::istream& in, const std::string& tag) {
  expect_token(in, tag);
  const auto n = read_value<std::size_t>(in, "vector length");
  std::vector<double> v(n);
  for (auto& x : v) x = read_value<double>(in, "vector entry");
  return v;
}

inline void write_matrix(std::ostream& out, const std::string& tag, const Matrix& m) {
  out << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_double(m(r, c));
    out << '\n';
  }
}

inline Matrix read_matrix(std::istream& in, const std::string& tag) {
  expect_token(in, tag);
  const auto rows = read_value<std::size_t>(in, "matrix rows");
  const auto cols = read_value<std::size_t>(in, "matrix cols");
  Matrix m(rows, cols);
  for (auto& x : m.data()) x = read_value<double>(in, "matrix entry");
  return m;
}

}  // namespace enose::detail
