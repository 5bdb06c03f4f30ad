#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <numeric>
#include <string>

#include "pinr/baseline.hpp"
#include "pinr/errors.hpp"

namespace pinr {

namespace {

using Vec = std::vector<double>;
using Operator = std::function<void(const Vec&, Vec&)>;

double dot(const Vec& a, const Vec& b) { return std::inner_product(a.begin(), a.end(), b.begin(), 0.0); }

void require_options(const PoissonOptions& opts) {
  if (!(opts.tol > 0.0)) throw ConfigError("solver tolerance must be positive");
  if (opts.max_iter == 0) throw ConfigError("solver needs at least one iteration");
}

// Conjugate gradient for a symmetric positive (semi)definite operator, from x = 0.
// Appends ||r_k|| / ||b|| to `history`.
Vec conjugate_gradient(const Operator& apply, const Vec& b, const PoissonOptions& opts,
                       Vec& history, std::size_t& iterations) {
  const std::size_t n = b.size();
  Vec x(n, 0.0), r = b, p = b, ap(n, 0.0);
  const double bnorm = std::sqrt(dot(b, b));
  iterations = 0;
  if (bnorm == 0.0) {
    history.push_back(0.0);
    return x;
  }
  double rr = dot(r, r);
  history.push_back(1.0);
  while (std::sqrt(rr) > opts.tol * bnorm) {
    if (iterations == opts.max_iter) {
      const double rel = std::sqrt(rr) / bnorm;
      throw ConvergenceError("conjugate gradient stopped after " + std::to_string(iterations) +
                                 " iterations at relative residual " + std::to_string(rel),
                             rel, iterations);
    }
    apply(p, ap);
    const double alpha = rr / dot(p, ap);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    const double next = dot(r, r);
    const double beta = next / rr;
    rr = next;
    for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
    ++iterations;
    history.push_back(std::sqrt(rr) / bnorm);
  }
  return x;
}

}  // namespace

GuidanceField forward_gradient(const ImageGrid& img, bool wrap) {
  const std::size_t h = img.height, w = img.width, c = img.channels;
  GuidanceField g{h, w, c, std::vector<double>(img.pixels() * c * 2, 0.0)};
  const double hx = img.domain.width() / static_cast<double>(w);
  const double hy = img.domain.height() / static_cast<double>(h);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        if (wrap || j + 1 < w) g.at(i, j, ch, 0) = (img.at(i, (j + 1) % w, ch) - img.at(i, j, ch)) / hx;
        if (wrap || i + 1 < h) g.at(i, j, ch, 1) = (img.at((i + 1) % h, j, ch) - img.at(i, j, ch)) / hy;
      }
    }
  }
  return g;
}

PoissonResult solve_torus(const GuidanceField& u, const std::vector<double>& mean,
                          const PoissonOptions& opts, const Domain& domain) {
  require_options(opts);
  const std::size_t h = u.height, w = u.width, c = u.channels;
  if (h == 0 || w == 0) throw ShapeError("guidance field is empty");
  if (mean.size() != c) {
    throw ShapeError("mean has " + std::to_string(mean.size()) + " entries for " +
                     std::to_string(c) + " channels");
  }
  const double hx = domain.width() / static_cast<double>(w);
  const double hy = domain.height() / static_cast<double>(h);
  const double ax = 1.0 / (hx * hx), ay = 1.0 / (hy * hy);
  const std::size_t n = h * w;

  // Negative periodic Laplacian.
  const Operator apply = [=](const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < h; ++i) {
      const std::size_t up = (i + h - 1) % h, down = (i + 1) % h;
      for (std::size_t j = 0; j < w; ++j) {
        const std::size_t left = (j + w - 1) % w, right = (j + 1) % w;
        const double v = x[i * w + j];
        y[i * w + j] = ax * (2.0 * v - x[i * w + left] - x[i * w + right]) +
                       ay * (2.0 * v - x[up * w + j] - x[down * w + j]);
      }
    }
  };

  PoissonResult result;
  result.image = ImageGrid(h, w, c, 0.0, domain);
  result.residuals.assign(c, {});
  std::vector<std::size_t> iters(c, 0);
  std::vector<std::exception_ptr> errors(c);

#pragma omp parallel for schedule(static)
  for (std::size_t ch = 0; ch < c; ++ch) {
    try {
      // -div U with backward differences.
      Vec b(n, 0.0);
      for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
          const double dx = (u.at(i, j, ch, 0) - u.at(i, (j + w - 1) % w, ch, 0)) / hx;
          const double dy = (u.at(i, j, ch, 1) - u.at((i + h - 1) % h, j, ch, 1)) / hy;
          b[i * w + j] = -(dx + dy);
        }
      }
      const double bmean = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
      for (double& v : b) v -= bmean;
      Vec x = conjugate_gradient(apply, b, opts, result.residuals[ch], iters[ch]);
      const double xmean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
      for (std::size_t p = 0; p < n; ++p) result.image.data[p * c + ch] = x[p] - xmean + mean[ch];
    } catch (...) {
      errors[ch] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.iterations = *std::max_element(iters.begin(), iters.end());
  return result;
}

PoissonResult solve_average_border(const ImageGrid& img, const PoissonOptions& opts) {
  require_options(opts);
  const std::size_t h = img.height, w = img.width, c = img.channels;
  if (h < 3 || w < 3) throw ShapeError("border averaging needs at least 3x3 pixels");
  const double hx = img.domain.width() / static_cast<double>(w);
  const double hy = img.domain.height() / static_cast<double>(h);
  const double ax = 1.0 / (hx * hx), ay = 1.0 / (hy * hy);
  const std::size_t ih = h - 2, iw = w - 2, n = ih * iw;

  PoissonResult result;
  result.image = img;
  ImageGrid& out = result.image;
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double corner =
        0.25 * (img.at(0, 0, ch) + img.at(0, w - 1, ch) + img.at(h - 1, 0, ch) + img.at(h - 1, w - 1, ch));
    for (std::size_t j = 1; j + 1 < w; ++j) {
      out.at(0, j, ch) = out.at(h - 1, j, ch) = 0.5 * (img.at(0, j, ch) + img.at(h - 1, j, ch));
    }
    for (std::size_t i = 1; i + 1 < h; ++i) {
      out.at(i, 0, ch) = out.at(i, w - 1, ch) = 0.5 * (img.at(i, 0, ch) + img.at(i, w - 1, ch));
    }
    out.at(0, 0, ch) = out.at(0, w - 1, ch) = out.at(h - 1, 0, ch) = out.at(h - 1, w - 1, ch) = corner;
  }
  if (n == 0) return result;

  // Negative Dirichlet Laplacian on the interior unknowns.
  const Operator apply = [=](const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < ih; ++i) {
      for (std::size_t j = 0; j < iw; ++j) {
        const double v = x[i * iw + j];
        double s = (2.0 * ax + 2.0 * ay) * v;
        if (j > 0) s -= ax * x[i * iw + j - 1];
        if (j + 1 < iw) s -= ax * x[i * iw + j + 1];
        if (i > 0) s -= ay * x[(i - 1) * iw + j];
        if (i + 1 < ih) s -= ay * x[(i + 1) * iw + j];
        y[i * iw + j] = s;
      }
    }
  };

  result.residuals.assign(c, {});
  std::vector<std::size_t> iters(c, 0);
  std::vector<std::exception_ptr> errors(c);

#pragma omp parallel for schedule(static)
  for (std::size_t ch = 0; ch < c; ++ch) {
    try {
      Vec b(n, 0.0);
      for (std::size_t i = 1; i + 1 < h; ++i) {
        for (std::size_t j = 1; j + 1 < w; ++j) {
          const double v = img.at(i, j, ch);
          double s = ax * (2.0 * v - img.at(i, j - 1, ch) - img.at(i, j + 1, ch)) +
                     ay * (2.0 * v - img.at(i - 1, j, ch) - img.at(i + 1, j, ch));
          if (j == 1) s += ax * out.at(i, 0, ch);
          if (j + 2 == w) s += ax * out.at(i, w - 1, ch);
          if (i == 1) s += ay * out.at(0, j, ch);
          if (i + 2 == h) s += ay * out.at(h - 1, j, ch);
          b[(i - 1) * iw + j - 1] = s;
        }
      }
      const Vec x = conjugate_gradient(apply, b, opts, result.residuals[ch], iters[ch]);
      for (std::size_t i = 0; i < ih; ++i) {
        for (std::size_t j = 0; j < iw; ++j) out.at(i + 1, j + 1, ch) = x[i * iw + j];
      }
    } catch (...) {
      errors[ch] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.iterations = *std::max_element(iters.begin(), iters.end());
  return result;
}

}  // namespace pinr
