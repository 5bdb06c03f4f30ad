#pragma once

#include <cstddef>
#include <span>

// Numeric kernels behind the tensor tape and the image solvers.
//
// pinr::kernels holds the OpenMP versions used everywhere in the library.
// pinr::kernels::reference holds plain serial loops with the same contracts;
// they are kept for the test suite and the benchmark, never called on hot paths.
//
// Every parallel kernel is bitwise deterministic regardless of thread count:
// work is split over output elements, and reductions use a fixed block size
// and a fixed pairwise tree.
namespace pinr::kernels {

// Strided read-only view of a row-major matrix, possibly transposed.
struct MatrixView {
  const double* data;
  std::size_t rows;
  std::size_t cols;
  std::size_t row_stride;
  std::size_t col_stride;

  static MatrixView of(const double* data, std::size_t rows, std::size_t cols) {
    return {data, rows, cols, cols, 1};
  }
  MatrixView transposed() const { return {data, cols, rows, col_stride, row_stride}; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * row_stride + c * col_stride]; }
};

// c[m x n] = a[m x k] * b[k x n]; c is overwritten and must not alias a or b.
void gemm(MatrixView a, MatrixView b, std::span<double> c);

// Elementwise maps. Output may alias an input of the same length.
void add(std::span<const double> a, std::span<const double> b, std::span<double> out);
void sub(std::span<const double> a, std::span<const double> b, std::span<double> out);
void mul(std::span<const double> a, std::span<const double> b, std::span<double> out);
void scale(std::span<const double> a, double s, std::span<double> out);
void sin(std::span<const double> a, std::span<double> out);
void cos(std::span<const double> a, std::span<double> out);
void sincos(std::span<const double> a, std::span<double> sin_out, std::span<double> cos_out);
void clamp01(std::span<const double> a, std::span<double> out);

// acc += a, acc += a * b, acc += s * a
void accumulate(std::span<double> acc, std::span<const double> a);
void accumulate_mul(std::span<double> acc, std::span<const double> a, std::span<const double> b);
void accumulate_scaled(std::span<double> acc, std::span<const double> a, double s);

// Deterministic sums (fixed block size, pairwise tree across blocks).
double sum(std::span<const double> a);
double dot(std::span<const double> a, std::span<const double> b);

// y = -Laplacian(x) with the 5-point stencil on an h x w torus, unit spacing.
void neg_laplacian_torus(std::span<const double> x, std::span<double> y, std::size_t h,
                         std::size_t w);

namespace reference {

void gemm(MatrixView a, MatrixView b, std::span<double> c);
void add(std::span<const double> a, std::span<const double> b, std::span<double> out);
void sub(std::span<const double> a, std::span<const double> b, std::span<double> out);
void mul(std::span<const double> a, std::span<const double> b, std::span<double> out);
void scale(std::span<const double> a, double s, std::span<double> out);
void sin(std::span<const double> a, std::span<double> out);
void cos(std::span<const double> a, std::span<double> out);
void clamp01(std::span<const double> a, std::span<double> out);
double sum(std::span<const double> a);
void neg_laplacian_torus(std::span<const double> x, std::span<double> y, std::size_t h,
                         std::size_t w);

}  // namespace reference

}  // namespace pinr::kernels
