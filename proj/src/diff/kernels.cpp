#include "pinr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "pinr/errors.hpp"

namespace pinr::kernels {

namespace {

// Register tile and cache blocking for gemm.
constexpr std::size_t kMr = 6;
constexpr std::size_t kNr = 16;
constexpr std::size_t kKc = 256;
constexpr std::size_t kMc = 48;
constexpr std::size_t kNc = 512;

// Elementwise work below this size stays on the calling thread.
constexpr std::ptrdiff_t kParallelGrain = 1 << 14;
// Reduction block; fixed so sums do not depend on the thread count.
constexpr std::size_t kSumBlock = 2048;

using v8d = double __attribute__((vector_size(64)));

inline v8d load8(const double* p) {
  v8d v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

inline void store8(double* p, v8d v) { std::memcpy(p, &v, sizeof(v)); }

// Packs a kc x nc block of b into kNr-wide column panels, zero padded.
void pack_b(const MatrixView& b, std::size_t p0, std::size_t kc, std::size_t j0, std::size_t nc,
            double* out) {
  for (std::size_t jp = 0; jp < nc; jp += kNr) {
    const std::size_t nr = std::min(kNr, nc - jp);
    for (std::size_t p = 0; p < kc; ++p) {
      double* dst = out + p * kNr;
      std::size_t j = 0;
      for (; j < nr; ++j) dst[j] = b(p0 + p, j0 + jp + j);
      for (; j < kNr; ++j) dst[j] = 0.0;
    }
    out += kc * kNr;
  }
}

// Packs an mc x kc block of a into kMr-tall row panels, zero padded.
void pack_a(const MatrixView& a, std::size_t i0, std::size_t mc, std::size_t p0, std::size_t kc,
            double* out) {
  for (std::size_t ip = 0; ip < mc; ip += kMr) {
    const std::size_t mr = std::min(kMr, mc - ip);
    for (std::size_t p = 0; p < kc; ++p) {
      double* dst = out + p * kMr;
      std::size_t i = 0;
      for (; i < mr; ++i) dst[i] = a(i0 + ip + i, p0 + p);
      for (; i < kMr; ++i) dst[i] = 0.0;
    }
    out += kc * kMr;
  }
}

// c[mr x nr] += packed_a * packed_b over kc steps.
void micro_kernel(std::size_t kc, const double* pa, const double* pb, double* c, std::size_t ldc,
                  std::size_t mr, std::size_t nr) {
  v8d acc[kMr][2] = {};
  for (std::size_t p = 0; p < kc; ++p) {
    const v8d b0 = load8(pb);
    const v8d b1 = load8(pb + 8);
    for (std::size_t r = 0; r < kMr; ++r) {
      const double ar = pa[r];
      acc[r][0] += ar * b0;
      acc[r][1] += ar * b1;
    }
    pa += kMr;
    pb += kNr;
  }
  if (mr == kMr && nr == kNr) {
    for (std::size_t r = 0; r < kMr; ++r) {
      double* row = c + r * ldc;
      store8(row, load8(row) + acc[r][0]);
      store8(row + 8, load8(row + 8) + acc[r][1]);
    }
    return;
  }
  alignas(64) double tile[kMr][kNr];
  for (std::size_t r = 0; r < kMr; ++r) {
    store8(tile[r], acc[r][0]);
    store8(tile[r] + 8, acc[r][1]);
  }
  for (std::size_t r = 0; r < mr; ++r) {
    for (std::size_t j = 0; j < nr; ++j) c[r * ldc + j] += tile[r][j];
  }
}

// sin/cos on a block of doubles: three-term reduction by pi/2 and the fdlibm
// minimax kernels on [-pi/4, pi/4]. Written branch-free so the loop vectorizes;
// arguments beyond kReduceLimit are redone with the libm routines.
constexpr double kReduceLimit = 1e6;
constexpr double kTwoOverPi = 6.36619772367581382433e-01;
constexpr double kPio2Hi = 1.5707963267948966;
constexpr double kPio2Mid = 6.123233995736766e-17;
constexpr double kPio2Lo = -1.4973849048591698e-33;

inline void sincos_reduced(double x, double& s_out, double& c_out) {
  const double n = std::rint(x * kTwoOverPi);
  double r = std::fma(-n, kPio2Hi, x);
  r = std::fma(-n, kPio2Mid, r);
  r = std::fma(-n, kPio2Lo, r);
  const double z = r * r;

  const double sp = -1.66666666666666324348e-01 +
                    z * (8.33333333332248946124e-03 +
                         z * (-1.98412698298579493134e-04 +
                              z * (2.75573137070700676789e-06 +
                                   z * (-2.50507602534068634195e-08 +
                                        z * 1.58969099521155010221e-10))));
  const double s = r + r * z * sp;

  const double cp = 4.16666666666666019037e-02 +
                    z * (-1.38888888888741095749e-03 +
                         z * (2.48015872894767294178e-05 +
                              z * (-2.75573143513906633035e-07 +
                                   z * (2.08757232129817482790e-09 +
                                        z * -1.13596475577881948265e-11))));
  const double hz = 0.5 * z;
  const double w = 1.0 - hz;
  const double c = w + (((1.0 - w) - hz) + z * z * cp);

  const auto q = static_cast<long long>(n) & 3;
  const double sin_mag = (q & 1) ? c : s;
  const double cos_mag = (q & 1) ? s : c;
  s_out = (q & 2) ? -sin_mag : sin_mag;
  // keeps sin(-0) == -0 and sin(tiny) == tiny
  s_out = std::abs(x) < 0x1p-27 ? x : s_out;
  c_out = ((q + 1) & 2) ? -cos_mag : cos_mag;
}

void sincos_block(const double* in, double* sin_out, double* cos_out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) sincos_reduced(in[i], sin_out[i], cos_out[i]);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(std::abs(in[i]) < kReduceLimit)) {
      sin_out[i] = std::sin(in[i]);
      cos_out[i] = std::cos(in[i]);
    }
  }
}

// Either output may be null; a block-sized scratch takes its place.
void sincos_parallel(std::span<const double> a, double* sin_out, double* cos_out) {
  constexpr std::size_t kBlock = 1024;
  const std::size_t n = a.size();
  const auto blocks = static_cast<std::ptrdiff_t>((n + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static) if (n > static_cast<std::size_t>(kParallelGrain))
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    alignas(64) double scratch[kBlock];
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t len = std::min(kBlock, n - lo);
    sincos_block(a.data() + lo, sin_out ? sin_out + lo : scratch,
                 cos_out ? cos_out + lo : scratch, len);
  }
}

void check_sizes(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  if (a.size() != b.size() || a.size() != out.size()) {
    throw ShapeError("elementwise kernel length mismatch: " + std::to_string(a.size()) + ", " +
                     std::to_string(b.size()) + " -> " + std::to_string(out.size()));
  }
}

void check_sizes(std::span<const double> a, std::span<double> out) {
  if (a.size() != out.size()) {
    throw ShapeError("elementwise kernel length mismatch: " + std::to_string(a.size()) + " -> " +
                     std::to_string(out.size()));
  }
}

template <class Fn>
void parallel_for(std::size_t n, Fn fn) {
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (count > kParallelGrain)
  for (std::ptrdiff_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

double pairwise(std::vector<double>& partial) {
  std::size_t n = partial.size();
  while (n > 1) {
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i + half < n; ++i) partial[i] += partial[i + half];
    n = half;
  }
  return partial.empty() ? 0.0 : partial[0];
}

template <class Term>
double blocked_sum(std::size_t n, Term term) {
  const std::size_t blocks = (n + kSumBlock - 1) / kSumBlock;
  std::vector<double> partial(blocks, 0.0);
  const auto count = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static) if (count > 4)
  for (std::ptrdiff_t blk = 0; blk < count; ++blk) {
    const std::size_t lo = static_cast<std::size_t>(blk) * kSumBlock;
    const std::size_t hi = std::min(n, lo + kSumBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(blk)] = s;
  }
  return pairwise(partial);
}

}  // namespace

void gemm(MatrixView a, MatrixView b, std::span<double> c) {
  const std::size_t m = a.rows, k = a.cols, n = b.cols;
  if (b.rows != k) {
    throw ShapeError("gemm inner dimension mismatch: " + shape_string({a.rows, a.cols}) + " * " +
                     shape_string({b.rows, b.cols}));
  }
  if (c.size() != m * n) throw ShapeError("gemm output has wrong size");
  std::fill(c.begin(), c.end(), 0.0);
  if (m == 0 || n == 0 || k == 0) return;

  std::vector<double> packed_b(kKc * (std::min(kNc, n) + kNr));
  const auto m_blocks = static_cast<std::ptrdiff_t>((m + kMc - 1) / kMc);

  for (std::size_t j0 = 0; j0 < n; j0 += kNc) {
    const std::size_t nc = std::min(kNc, n - j0);
    for (std::size_t p0 = 0; p0 < k; p0 += kKc) {
      const std::size_t kc = std::min(kKc, k - p0);
      pack_b(b, p0, kc, j0, nc, packed_b.data());
      const double* pb_base = packed_b.data();
      const bool parallel = m * nc * kc > (1u << 16);
#pragma omp parallel if (parallel)
      {
        std::vector<double> packed_a(kMc * kKc);
#pragma omp for schedule(static)
        for (std::ptrdiff_t blk = 0; blk < m_blocks; ++blk) {
          const std::size_t i0 = static_cast<std::size_t>(blk) * kMc;
          const std::size_t mc = std::min(kMc, m - i0);
          pack_a(a, i0, mc, p0, kc, packed_a.data());
          for (std::size_t jp = 0; jp < nc; jp += kNr) {
            const std::size_t nr = std::min(kNr, nc - jp);
            const double* pb = pb_base + (jp / kNr) * kc * kNr;
            for (std::size_t ip = 0; ip < mc; ip += kMr) {
              const std::size_t mr = std::min(kMr, mc - ip);
              micro_kernel(kc, packed_a.data() + (ip / kMr) * kc * kMr, pb,
                           c.data() + (i0 + ip) * n + j0 + jp, n, mr, nr);
            }
          }
        }
      }
    }
  }
}

void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_sizes(a, b, out);
  parallel_for(a.size(), [&](std::size_t i) { out[i] = a[i] + b[i]; });
}

void sub(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_sizes(a, b, out);
  parallel_for(a.size(), [&](std::size_t i) { out[i] = a[i] - b[i]; });
}

void mul(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_sizes(a, b, out);
  parallel_for(a.size(), [&](std::size_t i) { out[i] = a[i] * b[i]; });
}

void scale(std::span<const double> a, double s, std::span<double> out) {
  check_sizes(a, out);
  parallel_for(a.size(), [&](std::size_t i) { out[i] = a[i] * s; });
}

void sin(std::span<const double> a, std::span<double> out) {
  check_sizes(a, out);
  sincos_parallel(a, out.data(), nullptr);
}

void cos(std::span<const double> a, std::span<double> out) {
  check_sizes(a, out);
  sincos_parallel(a, nullptr, out.data());
}

void sincos(std::span<const double> a, std::span<double> sin_out, std::span<double> cos_out) {
  check_sizes(a, sin_out);
  check_sizes(a, cos_out);
  sincos_parallel(a, sin_out.data(), cos_out.data());
}

void clamp01(std::span<const double> a, std::span<double> out) {
  check_sizes(a, out);
  parallel_for(a.size(), [&](std::size_t i) { out[i] = std::clamp(a[i], 0.0, 1.0); });
}

void accumulate(std::span<double> acc, std::span<const double> a) {
  check_sizes(a, acc);
  parallel_for(a.size(), [&](std::size_t i) { acc[i] += a[i]; });
}

void accumulate_mul(std::span<double> acc, std::span<const double> a, std::span<const double> b) {
  check_sizes(a, b, acc);
  parallel_for(a.size(), [&](std::size_t i) { acc[i] += a[i] * b[i]; });
}

void accumulate_scaled(std::span<double> acc, std::span<const double> a, double s) {
  check_sizes(a, acc);
  parallel_for(a.size(), [&](std::size_t i) { acc[i] += s * a[i]; });
}

double sum(std::span<const double> a) {
  return blocked_sum(a.size(), [&](std::size_t i) { return a[i]; });
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot length mismatch");
  return blocked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

void neg_laplacian_torus(std::span<const double> x, std::span<double> y, std::size_t h,
                         std::size_t w) {
  if (x.size() != h * w || y.size() != h * w) throw ShapeError("laplacian size mismatch");
  const auto rows = static_cast<std::ptrdiff_t>(h);
#pragma omp parallel for schedule(static) if (h * w > 16384)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const std::size_t up = (i + h - 1) % h, down = (i + 1) % h;
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t left = (j + w - 1) % w, right = (j + 1) % w;
      y[i * w + j] = 4.0 * x[i * w + j] - x[up * w + j] - x[down * w + j] - x[i * w + left] -
                     x[i * w + right];
    }
  }
}

}  // namespace pinr::kernels
