#include "pinr/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <limits>
#include <memory>

#include "pinr/errors.hpp"

namespace pinr {

namespace {

constexpr double kKr = 0.299, kKg = 0.587, kKb = 0.114;

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

void require_rgb(const ImageGrid& img) {
  if (img.channels != 3) {
    throw ShapeError("color conversion needs 3 channels, got " + std::to_string(img.channels));
  }
}

[[noreturn]] void png_fail(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  *text = message;
  png_longjmp(png, 1);
}

}  // namespace

ImageGrid::ImageGrid(std::size_t h, std::size_t w, std::size_t c, double fill, Domain d)
    : height(h), width(w), channels(c), data(h * w * c, fill), domain(d) {}

double ImageGrid::x_of(std::size_t j) const {
  return domain.x0 + (static_cast<double>(j) + 0.5) * domain.width() / static_cast<double>(width);
}

double ImageGrid::y_of(std::size_t i) const {
  return domain.y0 + (static_cast<double>(i) + 0.5) * domain.height() / static_cast<double>(height);
}

diff::Tensor grid_coordinates(const Domain& domain, std::size_t height, std::size_t width) {
  diff::Tensor xy({height * width, 2});
  const double dx = domain.width() / static_cast<double>(width);
  const double dy = domain.height() / static_cast<double>(height);
  for (std::size_t i = 0; i < height; ++i) {
    const double y = domain.y0 + (static_cast<double>(i) + 0.5) * dy;
    for (std::size_t j = 0; j < width; ++j) {
      xy.at(i * width + j, 0) = domain.x0 + (static_cast<double>(j) + 0.5) * dx;
      xy.at(i * width + j, 1) = y;
    }
  }
  return xy;
}

ImageGrid load_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw FormatError("cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError(path.string() + " is not a PNG file");
  }

  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("libpng initialization failed");
  }
  ImageGrid img;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> pixels;
  std::string rejected;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int type = png_get_color_type(png, info);
  if (depth != 8) {
    rejected = "unsupported bit depth " + std::to_string(depth) + " (8-bit only)";
  } else if (type != PNG_COLOR_TYPE_GRAY && type != PNG_COLOR_TYPE_RGB) {
    rejected = "unsupported color type (8-bit gray or RGB only)";
  }
  if (rejected.empty()) {
    img.height = png_get_image_height(png, info);
    img.width = png_get_image_width(png, info);
    img.channels = type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    png_set_interlace_handling(png);
    png_read_update_info(png, info);
    const std::size_t stride = img.width * img.channels;
    pixels.resize(stride * img.height);
    rows.resize(img.height);
    for (std::size_t i = 0; i < img.height; ++i) rows[i] = pixels.data() + i * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!rejected.empty()) throw FormatError(path.string() + ": " + rejected);

  img.data.resize(pixels.size());
  for (std::size_t k = 0; k < pixels.size(); ++k) img.data[k] = pixels[k] / 255.0;
  return img;
}

void save_png(const ImageGrid& img, const std::filesystem::path& path) {
  if (img.channels != 1 && img.channels != 3 && img.channels != 4) {
    throw ShapeError("PNG export needs 1, 3 or 4 channels, got " + std::to_string(img.channels));
  }
  if (img.width == 0 || img.height == 0) throw ShapeError("cannot write an empty image");
  std::vector<unsigned char> bytes(img.data.size());
  for (std::size_t k = 0; k < bytes.size(); ++k) {
    const double v = std::clamp(img.data[k], 0.0, 1.0);
    bytes[k] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  png_image out{};
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(img.width);
  out.height = static_cast<png_uint_32>(img.height);
  out.format = img.channels == 4   ? PNG_FORMAT_RGBA
               : img.channels == 3 ? PNG_FORMAT_RGB
                                   : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&out, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    const std::string message = out.message;
    png_image_free(&out);
    throw FormatError("cannot write " + path.string() + ": " + message);
  }
}

ImageGrid rgb_to_ycbcr(const ImageGrid& img) {
  require_rgb(img);
  ImageGrid out = img;
  for (std::size_t p = 0; p < img.pixels(); ++p) {
    const double r = img.data[3 * p], g = img.data[3 * p + 1], b = img.data[3 * p + 2];
    const double y = kKr * r + kKg * g + kKb * b;
    out.data[3 * p] = y;
    out.data[3 * p + 1] = 0.5 + (b - y) * 0.5 / (1.0 - kKb);
    out.data[3 * p + 2] = 0.5 + (r - y) * 0.5 / (1.0 - kKr);
  }
  return out;
}

ImageGrid ycbcr_to_rgb(const ImageGrid& img) {
  require_rgb(img);
  ImageGrid out = img;
  for (std::size_t p = 0; p < img.pixels(); ++p) {
    const double y = img.data[3 * p];
    const double b = y + (img.data[3 * p + 1] - 0.5) * 2.0 * (1.0 - kKb);
    const double r = y + (img.data[3 * p + 2] - 0.5) * 2.0 * (1.0 - kKr);
    out.data[3 * p] = r;
    out.data[3 * p + 1] = (y - kKr * r - kKb * b) / kKg;
    out.data[3 * p + 2] = b;
  }
  return out;
}

ImageGrid to_color_space(const ImageGrid& rgb, ColorSpace space) {
  return space == ColorSpace::kYCbCr && rgb.channels == 3 ? rgb_to_ycbcr(rgb) : rgb;
}

ImageGrid from_color_space(const ImageGrid& img, ColorSpace space) {
  return space == ColorSpace::kYCbCr && img.channels == 3 ? ycbcr_to_rgb(img) : img;
}

ImageGrid clamp01(ImageGrid img) {
  for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
  return img;
}

double mse(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b)) throw ShapeError("images differ in shape");
  if (a.data.empty()) throw ShapeError("empty images");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    const double d = a.data[k] - b.data[k];
    sum += d * d;
  }
  return sum / static_cast<double>(a.data.size());
}

double psnr(const ImageGrid& a, const ImageGrid& b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(m);
}

ImageGrid sample_raw(const MrNet& net, const Domain& domain, std::size_t height,
                     std::size_t width, double t) {
  if (height == 0 || width == 0) throw ConfigError("sample resolution must be positive");
  const diff::Tensor xy = grid_coordinates(domain, height, width);
  const diff::Tensor values = mrnet_eval(net, xy, t);
  ImageGrid img(height, width, net.channels(), 0.0, domain);
  std::copy(values.data().begin(), values.data().end(), img.data.begin());
  return img;
}

ImageGrid sample_grid(const MrNet& net, const Domain& domain, std::size_t height,
                      std::size_t width, double t, ColorSpace space) {
  return clamp01(from_color_space(sample_raw(net, domain, height, width, t), space));
}

ImageGrid gradient_magnitude(const ImageGrid& img) {
  ImageGrid out(img.height, img.width, 1, 0.0, img.domain);
  if (img.height == 0 || img.width == 0) return out;
  const double sx = static_cast<double>(img.width) / img.domain.width();
  const double sy = static_cast<double>(img.height) / img.domain.height();
  double peak = 0.0;
  for (std::size_t i = 0; i < img.height; ++i) {
    const std::size_t up = (i + img.height - 1) % img.height, down = (i + 1) % img.height;
    for (std::size_t j = 0; j < img.width; ++j) {
      const std::size_t left = (j + img.width - 1) % img.width, right = (j + 1) % img.width;
      double sum = 0.0;
      for (std::size_t c = 0; c < img.channels; ++c) {
        const double gx = 0.5 * sx * (img.at(i, right, c) - img.at(i, left, c));
        const double gy = 0.5 * sy * (img.at(down, j, c) - img.at(up, j, c));
        sum += gx * gx + gy * gy;
      }
      out.at(i, j, 0) = std::sqrt(sum);
      peak = std::max(peak, out.at(i, j, 0));
    }
  }
  if (peak > 0.0) {
    for (double& v : out.data) v /= peak;
  }
  return out;
}

namespace {

double pixel_distance(const ImageGrid& img, std::size_t i0, std::size_t j0, std::size_t i1,
                      std::size_t j1) {
  double sum = 0.0;
  for (std::size_t c = 0; c < img.channels; ++c) {
    const double d = img.at(i0, j0, c) - img.at(i1, j1, c);
    sum += d * d;
  }
  return std::sqrt(sum);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

double seam_score(const ImageGrid& img) {
  if (img.height < 2 || img.width < 2) throw ShapeError("seam score needs at least 2x2 pixels");
  std::vector<double> seam, interior;
  seam.reserve(img.height + img.width);
  interior.reserve(2 * img.pixels());
  for (std::size_t i = 0; i < img.height; ++i) {
    for (std::size_t j = 0; j + 1 < img.width; ++j) interior.push_back(pixel_distance(img, i, j, i, j + 1));
    seam.push_back(pixel_distance(img, i, img.width - 1, i, 0));
  }
  for (std::size_t j = 0; j < img.width; ++j) {
    for (std::size_t i = 0; i + 1 < img.height; ++i) interior.push_back(pixel_distance(img, i, j, i + 1, j));
    seam.push_back(pixel_distance(img, img.height - 1, j, 0, j));
  }
  const double base = median(std::move(interior));
  const double across = median(std::move(seam));
  if (base == 0.0) return across == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return across / base;
}

ImageGrid tile(const ImageGrid& img, std::size_t rx, std::size_t ry) {
  Domain d = img.domain;
  d.x1 = d.x0 + d.width() * static_cast<double>(rx);
  d.y1 = d.y0 + d.height() * static_cast<double>(ry);
  ImageGrid out(img.height * ry, img.width * rx, img.channels, 0.0, d);
  for (std::size_t i = 0; i < out.height; ++i) {
    for (std::size_t j = 0; j < out.width; ++j) {
      for (std::size_t c = 0; c < img.channels; ++c) {
        out.at(i, j, c) = img.at(i % img.height, j % img.width, c);
      }
    }
  }
  return out;
}

ImageGrid roll(const ImageGrid& img, std::size_t di, std::size_t dj) {
  ImageGrid out = img;
  for (std::size_t i = 0; i < img.height; ++i) {
    for (std::size_t j = 0; j < img.width; ++j) {
      for (std::size_t c = 0; c < img.channels; ++c) {
        out.at(i, j, c) = img.at((i + di) % img.height, (j + dj) % img.width, c);
      }
    }
  }
  return out;
}

}  // namespace pinr
