#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace taskmap {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

template <class... Args>
[[noreturn]] inline void fail(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  throw Error(os.str());
}

enum class DType { F32, I32 };

inline const char* dtype_name(DType t) { return t == DType::F32 ? "f32" : "i32"; }

inline DType dtype_from_name(const std::string& s) {
  if (s == "f32") return DType::F32;
  if (s == "i32") return DType::I32;
  fail("unknown dtype: ", s);
}

inline bool is_float_dtype(DType t) { return t == DType::F32; }

// Floor-division semantics; b must be nonzero.
inline int64_t floordiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline int64_t floormod(int64_t a, int64_t b) {
  int64_t r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) r += b;
  return r;
}

}  // namespace taskmap
