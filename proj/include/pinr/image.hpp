#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "pinr/mrnet.hpp"
#include "pinr/tensor.hpp"

namespace pinr {

// Axis-aligned rectangle [x0, x1] x [y0, y1]. Columns run along x, rows along y.
struct Domain {
  double x0 = -1.0;
  double y0 = -1.0;
  double x1 = 1.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool operator==(const Domain&) const = default;
};

enum class ColorSpace { kYCbCr, kRgb };

// H x W x C samples anchored at cell centers of `domain`:
// pixel (i, j) sits at (x0 + (j + 1/2) * width / W, y0 + (i + 1/2) * height / H).
struct ImageGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> data;
  Domain domain;

  ImageGrid() = default;
  ImageGrid(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0, Domain d = {});

  std::size_t pixels() const { return height * width; }
  double& at(std::size_t i, std::size_t j, std::size_t c) {
    return data[(i * width + j) * channels + c];
  }
  double at(std::size_t i, std::size_t j, std::size_t c) const {
    return data[(i * width + j) * channels + c];
  }
  double x_of(std::size_t j) const;
  double y_of(std::size_t i) const;
  bool same_shape(const ImageGrid& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

// Cell-center coordinates in row-major pixel order, (H*W) x 2.
diff::Tensor grid_coordinates(const Domain& domain, std::size_t height, std::size_t width);

// 8-bit gray or RGB. Anything else (16-bit, palette, alpha) is a FormatError.
ImageGrid load_png(const std::filesystem::path& path);
// Channels 1 (gray), 3 (RGB) or 4 (RGBA); values clamped to [0, 1] and rounded to 8 bits.
void save_png(const ImageGrid& img, const std::filesystem::path& path);

// BT.601 full range. Throws ShapeError unless C = 3.
ImageGrid rgb_to_ycbcr(const ImageGrid& img);
ImageGrid ycbcr_to_rgb(const ImageGrid& img);
ImageGrid to_color_space(const ImageGrid& rgb, ColorSpace space);
ImageGrid from_color_space(const ImageGrid& img, ColorSpace space);

ImageGrid clamp01(ImageGrid img);

// 10 log10(1 / MSE) over all samples; +infinity for identical inputs.
double psnr(const ImageGrid& a, const ImageGrid& b);
double mse(const ImageGrid& a, const ImageGrid& b);

// Evaluates the network at every cell center at level t, converts to RGB when
// the network works in YCbCr, and clamps to [0, 1].
ImageGrid sample_grid(const MrNet& net, const Domain& domain, std::size_t height,
                      std::size_t width, double t, ColorSpace space = ColorSpace::kYCbCr);
// Same without conversion or clamping (network output space).
ImageGrid sample_raw(const MrNet& net, const Domain& domain, std::size_t height,
                     std::size_t width, double t);

// Per-pixel Frobenius norm of the wrap-around central-difference Jacobian,
// divided by its maximum when that is positive. Single channel.
ImageGrid gradient_magnitude(const ImageGrid& img);

// Median across-seam difference magnitude (column W-1 to 0 and row H-1 to 0)
// divided by the median interior neighbor difference magnitude. Magnitudes
// are Euclidean norms over channels. About 1 for tileable images.
double seam_score(const ImageGrid& img);

// Repeats the image rx times along x and ry times along y.
ImageGrid tile(const ImageGrid& img, std::size_t rx, std::size_t ry);

// Cyclic shift: out(i, j) = img((i + di) mod H, (j + dj) mod W). Keeps the domain.
ImageGrid roll(const ImageGrid& img, std::size_t di, std::size_t dj);

}  // namespace pinr
