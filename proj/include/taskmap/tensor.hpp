#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "taskmap/common.hpp"

namespace taskmap {

// Dense host tensor. f32 data is held as double internally; i32 as int64.
// Arithmetic on i32 tensors is exact, which the equivalence tests rely on.
struct Tensor {
  DType dtype = DType::F32;
  std::vector<int64_t> shape;
  std::vector<double> fdata;
  std::vector<int64_t> idata;

  static Tensor zeros(DType t, std::vector<int64_t> shape);

  int64_t size() const;
  bool is_float() const { return dtype == DType::F32; }

  double fat(int64_t flat) const { return fdata[flat]; }
  int64_t iat(int64_t flat) const { return idata[flat]; }

  int64_t flatten(const std::vector<int64_t>& idx) const;
};

using TensorMap = std::map<std::string, Tensor>;

// Deterministic RNG helpers (seeded; independent of libstdc++ distributions).
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  uint64_t next();
  int64_t uniform_int(int64_t lo, int64_t hi);  // inclusive
  double uniform_real(double lo, double hi);
};

Tensor random_tensor(DType t, std::vector<int64_t> shape, Rng& rng);

// Max |a-b| / max(1, |b|) over all elements; shapes must match.
double max_rel_error(const Tensor& a, const Tensor& b);
bool exact_equal(const Tensor& a, const Tensor& b);

}  // namespace taskmap
