#include <algorithm>
#include <cmath>
#include <random>

#include "pinr/errors.hpp"
#include "pinr/trainer.hpp"

namespace pinr {

bool MaskField::all_equal(double v) const {
  return std::all_of(values.begin(), values.end(), [v](double x) { return x == v; });
}

ImageGrid MaskField::image() const {
  ImageGrid img(height, width, 1);
  img.data = values;
  return img;
}

MaskField no_mask(std::size_t height, std::size_t width) {
  return {height, width, std::vector<double>(height * width, 0.0), MaskKind::kNone};
}

MaskField soft_mask(std::size_t height, std::size_t width, double gamma, double p) {
  if (!(gamma > 0.0)) throw ConfigError("soft mask exponent must be positive");
  if (!(p >= 1.0)) throw ConfigError("soft mask norm order must be at least 1");
  if (height == 0 || width == 0) throw ConfigError("mask size must be positive");
  MaskField m{height, width, std::vector<double>(height * width, 0.0), MaskKind::kSoft};
  const double cy = 0.5 * static_cast<double>(height - 1);
  const double cx = 0.5 * static_cast<double>(width - 1);
  auto lp = [p](double a, double b) {
    if (std::isinf(p)) return std::max(std::abs(a), std::abs(b));
    return std::pow(std::pow(std::abs(a), p) + std::pow(std::abs(b), p), 1.0 / p);
  };
  const double corner = lp(cx > 0 ? 1.0 : 0.0, cy > 0 ? 1.0 : 0.0);
  for (std::size_t i = 0; i < height; ++i) {
    const double v = cy > 0 ? (static_cast<double>(i) - cy) / cy : 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double u = cx > 0 ? (static_cast<double>(j) - cx) / cx : 0.0;
      const double r = corner > 0 ? std::clamp(lp(u, v) / corner, 0.0, 1.0) : 0.0;
      m.values[i * width + j] = std::pow(r, gamma);
    }
  }
  return m;
}

MaskField binary_border_mask(std::size_t height, std::size_t width, std::size_t margin) {
  const std::size_t half = (std::min(height, width) + 1) / 2;
  if (margin == 0 || margin > half) {
    throw ConfigError("mask margin must be in [1, " + std::to_string(half) + "], got " +
                      std::to_string(margin));
  }
  MaskField m{height, width, std::vector<double>(height * width, 0.0), MaskKind::kBinary};
  for (std::size_t i = 0; i < height; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t d = std::min({i, j, height - 1 - i, width - 1 - j});
      m.values[i * width + j] = d < margin ? 1.0 : 0.0;
    }
  }
  return m;
}

MaskField periodic_class_mask(std::size_t height, std::size_t width, std::size_t r1,
                              std::size_t r2, std::uint64_t seed) {
  if (r1 == 0 || r2 == 0 || height % r1 != 0 || width % r2 != 0) {
    throw ConfigError("repeats (" + std::to_string(r1) + "," + std::to_string(r2) +
                      ") must divide the image size " + std::to_string(height) + "x" +
                      std::to_string(width));
  }
  if (r1 * r2 == 1) throw ConfigError("repeats (1,1) would drop every pixel");
  const std::size_t ph = height / r1, pw = width / r2;
  MaskField m{height, width, std::vector<double>(height * width, 0.0), MaskKind::kPeriodicClass};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, r1 * r2 - 1);
  for (std::size_t i = 0; i < ph; ++i) {
    for (std::size_t j = 0; j < pw; ++j) {
      const std::size_t k = pick(rng);
      m.values[(i + (k / r2) * ph) * width + j + (k % r2) * pw] = 1.0;
    }
  }
  return m;
}

GuidanceField guidance_from_image(const ImageGrid& img, bool period_aware) {
  if (img.height < 2 || img.width < 2) throw ShapeError("guidance needs at least 2x2 pixels");
  GuidanceField g{img.height, img.width, img.channels,
                  std::vector<double>(img.pixels() * img.channels * 2, 0.0)};
  const double hx = img.domain.width() / static_cast<double>(img.width);
  const double hy = img.domain.height() / static_cast<double>(img.height);
  const std::size_t h = img.height, w = img.width;
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      for (std::size_t c = 0; c < img.channels; ++c) {
        double gx, gy;
        if (period_aware) {
          gx = (img.at(i, (j + 1) % w, c) - img.at(i, (j + w - 1) % w, c)) / (2.0 * hx);
          gy = (img.at((i + 1) % h, j, c) - img.at((i + h - 1) % h, j, c)) / (2.0 * hy);
        } else {
          const std::size_t jl = j == 0 ? 0 : j - 1, jr = j + 1 == w ? j : j + 1;
          const std::size_t iu = i == 0 ? 0 : i - 1, id = i + 1 == h ? i : i + 1;
          gx = (img.at(i, jr, c) - img.at(i, jl, c)) / (static_cast<double>(jr - jl) * hx);
          gy = (img.at(id, j, c) - img.at(iu, j, c)) / (static_cast<double>(id - iu) * hy);
        }
        g.at(i, j, c, 0) = gx;
        g.at(i, j, c, 1) = gy;
      }
    }
  }
  return g;
}

namespace {

constexpr double kBinomial[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

std::size_t wrap(std::size_t i, int k, std::size_t n) {
  return static_cast<std::size_t>(static_cast<long long>(i + 2 * n) + k) % n;
}

// Separable wrap-around blur of an h x w x c array.
std::vector<double> blur(const std::vector<double>& src, std::size_t h, std::size_t w,
                         std::size_t c) {
  std::vector<double> tmp(src.size(), 0.0), out(src.size(), 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      for (int k = -2; k <= 2; ++k) {
        const std::size_t jj = wrap(j, k, w);
        for (std::size_t ch = 0; ch < c; ++ch) {
          tmp[(i * w + j) * c + ch] += kBinomial[k + 2] * src[(i * w + jj) * c + ch];
        }
      }
    }
  }
  for (std::size_t i = 0; i < h; ++i) {
    for (int k = -2; k <= 2; ++k) {
      const std::size_t ii = wrap(i, k, h);
      for (std::size_t j = 0; j < w * c; ++j) out[i * w * c + j] += kBinomial[k + 2] * tmp[ii * w * c + j];
    }
  }
  return out;
}

}  // namespace

Pyramid build_pyramid(const ImageGrid& img, std::size_t n, const std::vector<std::uint8_t>& keep) {
  if (n == 0) throw ConfigError("pyramid needs at least one level");
  if (!keep.empty() && keep.size() != img.pixels()) throw ShapeError("keep mask size mismatch");
  std::size_t h = img.height, w = img.width;
  for (std::size_t l = 1; l < n; ++l) {
    h /= 2;
    w /= 2;
  }
  if (h < 8 || w < 8) {
    throw ConfigError("pyramid with " + std::to_string(n) + " levels would go below 8x8 from " +
                      std::to_string(img.height) + "x" + std::to_string(img.width));
  }

  Pyramid pyr;
  pyr.levels.assign(n, ImageGrid{});
  pyr.keep.assign(keep.empty() ? 0 : n, {});
  pyr.levels[n - 1] = img;
  if (!keep.empty()) pyr.keep[n - 1] = keep;

  for (std::size_t l = n - 1; l-- > 0;) {
    const ImageGrid& fine = pyr.levels[l + 1];
    const std::size_t fh = fine.height, fw = fine.width, c = fine.channels;
    std::vector<double> num = fine.data;
    std::vector<double> den;
    if (!keep.empty()) {
      const auto& fk = pyr.keep[l + 1];
      den.assign(fh * fw, 0.0);
      for (std::size_t p = 0; p < fh * fw; ++p) {
        den[p] = fk[p];
        for (std::size_t ch = 0; ch < c; ++ch) num[p * c + ch] *= fk[p];
      }
      den = blur(den, fh, fw, 1);
    }
    num = blur(num, fh, fw, c);

    Domain d = fine.domain;
    const double hx = d.width() / static_cast<double>(fw), hy = d.height() / static_cast<double>(fh);
    d.x0 -= 0.5 * hx;
    d.x1 = d.x0 + 2.0 * hx * static_cast<double>(fw / 2);
    d.y0 -= 0.5 * hy;
    d.y1 = d.y0 + 2.0 * hy * static_cast<double>(fh / 2);
    ImageGrid coarse(fh / 2, fw / 2, c, 0.0, d);
    std::vector<std::uint8_t> ck(keep.empty() ? 0 : coarse.pixels(), 0);
    for (std::size_t i = 0; i < coarse.height; ++i) {
      for (std::size_t j = 0; j < coarse.width; ++j) {
        const std::size_t src = (2 * i) * fw + 2 * j;
        const double weight = keep.empty() ? 1.0 : den[src];
        if (!keep.empty()) ck[i * coarse.width + j] = weight > 0.0;
        for (std::size_t ch = 0; ch < c; ++ch) {
          coarse.at(i, j, ch) = weight > 0.0 ? num[src * c + ch] / weight : 0.0;
        }
      }
    }
    pyr.levels[l] = std::move(coarse);
    if (!keep.empty()) pyr.keep[l] = std::move(ck);
  }
  return pyr;
}

}  // namespace pinr
