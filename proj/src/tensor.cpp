#include "taskmap/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace taskmap {

Tensor Tensor::zeros(DType t, std::vector<int64_t> shape) {
  Tensor out;
  out.dtype = t;
  out.shape = std::move(shape);
  int64_t n = 1;
  for (int64_t d : out.shape) {
    if (d <= 0) fail("tensor extents must be positive");
    n *= d;
  }
  if (t == DType::F32) {
    out.fdata.assign(n, 0.0);
  } else {
    out.idata.assign(n, 0);
  }
  return out;
}

int64_t Tensor::size() const {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

int64_t Tensor::flatten(const std::vector<int64_t>& idx) const {
  if (idx.size() != shape.size()) fail("index rank mismatch");
  int64_t flat = 0;
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= shape[i])
      fail("index ", idx[i], " out of bounds for extent ", shape[i]);
    flat = flat * shape[i] + idx[i];
  }
  return flat;
}

uint64_t Rng::next() {
  // splitmix64
  state += 0x9e3779b97f4a7c15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
  uint64_t span = static_cast<uint64_t>(hi - lo + 1);
  return lo + static_cast<int64_t>(next() % span);
}

double Rng::uniform_real(double lo, double hi) {
  double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

Tensor random_tensor(DType t, std::vector<int64_t> shape, Rng& rng) {
  Tensor out = Tensor::zeros(t, std::move(shape));
  if (t == DType::F32) {
    for (double& v : out.fdata) v = rng.uniform_real(-1.0, 1.0);
  } else {
    for (int64_t& v : out.idata) v = rng.uniform_int(-8, 8);
  }
  return out;
}

double max_rel_error(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape || a.dtype != b.dtype) fail("tensor shape/dtype mismatch in comparison");
  double worst = 0.0;
  if (a.is_float()) {
    for (size_t i = 0; i < a.fdata.size(); ++i) {
      double denom = std::max(1.0, std::abs(b.fdata[i]));
      worst = std::max(worst, std::abs(a.fdata[i] - b.fdata[i]) / denom);
    }
  } else {
    for (size_t i = 0; i < a.idata.size(); ++i) {
      double denom = std::max<double>(1.0, std::abs(static_cast<double>(b.idata[i])));
      worst = std::max(worst, std::abs(static_cast<double>(a.idata[i] - b.idata[i])) / denom);
    }
  }
  return worst;
}

bool exact_equal(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape || a.dtype != b.dtype) return false;
  return a.is_float() ? a.fdata == b.fdata : a.idata == b.idata;
}

}  // namespace taskmap
