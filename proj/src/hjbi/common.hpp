#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace hjbi {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Error categories surfaced through the C API as status codes.
enum class ErrorKind {
  invalid_argument,
  config,
  not_converged,
  cordes_violation,
  linear_solve,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::invalid_argument, what);
}

/// Frobenius inner product M:N.
inline double frobenius(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

}  // namespace hjbi
