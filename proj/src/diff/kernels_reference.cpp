#include <algorithm>
#include <cmath>

#include "pinr/errors.hpp"
#include "pinr/kernels.hpp"

namespace pinr::kernels::reference {

void gemm(MatrixView a, MatrixView b, std::span<double> c) {
  if (a.cols != b.rows) throw ShapeError("gemm inner dimension mismatch");
  if (c.size() != a.rows * b.cols) throw ShapeError("gemm output has wrong size");
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols; ++p) s = std::fma(a(i, p), b(p, j), s);
      c[i * b.cols + j] = s;
    }
  }
}

void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
}

void sub(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
}

void mul(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
}

void scale(std::span<const double> a, double s, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
}

void sin(std::span<const double> a, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::sin(a[i]);
}

void cos(std::span<const double> a, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::cos(a[i]);
}

void clamp01(std::span<const double> a, std::span<double> out) {
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::clamp(a[i], 0.0, 1.0);
}

double sum(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v;
  return s;
}

void neg_laplacian_torus(std::span<const double> x, std::span<double> y, std::size_t h,
                         std::size_t w) {
  auto at = [&](std::ptrdiff_t i, std::ptrdiff_t j) {
    const auto hh = static_cast<std::ptrdiff_t>(h), ww = static_cast<std::ptrdiff_t>(w);
    return x[static_cast<std::size_t>(((i % hh + hh) % hh) * ww + (j % ww + ww) % ww)];
  };
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const auto si = static_cast<std::ptrdiff_t>(i), sj = static_cast<std::ptrdiff_t>(j);
      y[i * w + j] = 4.0 * at(si, sj) - at(si - 1, sj) - at(si + 1, sj) - at(si, sj - 1) -
                     at(si, sj + 1);
    }
  }
}

}  // namespace pinr::kernels::reference
