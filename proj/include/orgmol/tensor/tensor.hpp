#ifndef ORGMOL_TENSOR_TENSOR_HPP
#define ORGMOL_TENSOR_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace orgmol {

struct NonFiniteValue : std::runtime_error {
  explicit NonFiniteValue(const std::string& what)
      : std::runtime_error("non-finite value: " + what) {}
};

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& what)
      : std::runtime_error("shape mismatch: " + what) {}
};

// Coarse high-water mark of tape-held tensor bytes, for run reports.
struct TensorGauge {
  static std::size_t& peak() {
    static std::size_t bytes = 0;
    return bytes;
  }
  static void observe(std::size_t live) {
    if (live > peak()) peak() = live;
  }
  static void reset() { peak() = 0; }
};

// Dense row-major 64-bit tensor; rank 1 or 2 in practice.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int> s, double fill = 0.0) : shape(std::move(s)) {
    data.assign(count(shape), fill);
  }
  Tensor(std::vector<int> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != count(shape))
      throw ShapeMismatch("data length does not match shape");
  }

  static size_t count(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) n *= static_cast<size_t>(d);
    return n;
  }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

  size_t size() const { return data.size(); }
  int rows() const { return shape.empty() ? 1 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols() + c];
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  bool all_finite() const {
    for (double x : data)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

// out = op(a) * op(b) where op transposes when the flag is set. `out` must be
// preallocated with the result shape; it is overwritten.
inline void gemm(const Tensor& a, bool ta, const Tensor& b, bool tb,
                 Tensor& out) {
  const int m = ta ? a.cols() : a.rows();
  const int k = ta ? a.rows() : a.cols();
  const int kb = tb ? b.cols() : b.rows();
  const int n = tb ? b.rows() : b.cols();
  if (k != kb || out.rows() != m || out.cols() != n)
    throw ShapeMismatch("gemm operands");
  std::fill(out.data.begin(), out.data.end(), 0.0);
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      const double av = ta ? a.at(p, i) : a.at(i, p);
      if (av == 0.0) continue;
      for (int j = 0; j < n; ++j)
        out.at(i, j) += av * (tb ? b.at(j, p) : b.at(p, j));
    }
}

}  // namespace orgmol

#endif  // ORGMOL_TENSOR_TENSOR_HPP
