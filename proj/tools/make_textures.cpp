// Writes the bundled test textures:
//   periodic_256.png  tileable 256x256 texture (integer frequencies only)
//   patch_128.png     non-tileable 128x128 patch (non-integer frequencies, lighting ramp)
//   repeat_128.png    64x64 tileable texture repeated 2x2
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <vector>

#include "pinr/image.hpp"

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Mode {
  double k1, k2, amplitude, phase;
};

// Random spectrum with amplitude ~ |k|^-decay. Integer frequencies keep the
// field periodic on the unit square.
std::vector<Mode> spectrum(std::mt19937_64& rng, int count, double kmax, bool integer,
                           double decay) {
  std::uniform_real_distribution<double> uk(-kmax, kmax), uphase(0.0, kTwoPi), uamp(0.5, 1.0);
  std::vector<Mode> modes;
  while (static_cast<int>(modes.size()) < count) {
    double k1 = uk(rng), k2 = uk(rng);
    if (integer) {
      k1 = std::round(k1);
      k2 = std::round(k2);
    }
    const double norm = std::hypot(k1, k2);
    if (norm < 1.0) continue;
    modes.push_back({k1, k2, uamp(rng) * std::pow(norm, -decay), uphase(rng)});
  }
  return modes;
}

double field(const std::vector<Mode>& modes, double u, double v) {
  double s = 0.0;
  for (const Mode& m : modes) s += m.amplitude * std::sin(kTwoPi * (m.k1 * u + m.k2 * v) + m.phase);
  return s;
}

// Two fields blended through a smooth palette.
pinr::ImageGrid render(std::size_t size, const std::vector<Mode>& a, const std::vector<Mode>& b,
                       double ramp) {
  pinr::ImageGrid img(size, size, 3);
  std::vector<double> fa(size * size), fb(size * size);
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(size);
      const double v = (static_cast<double>(i) + 0.5) / static_cast<double>(size);
      fa[i * size + j] = field(a, u, v);
      fb[i * size + j] = field(b, u, v);
      sa += fa[i * size + j] * fa[i * size + j];
      sb += fb[i * size + j] * fb[i * size + j];
    }
  }
  sa = std::sqrt(sa / static_cast<double>(size * size));
  sb = std::sqrt(sb / static_cast<double>(size * size));
  const double low[3] = {0.55, 0.33, 0.18}, high[3] = {0.93, 0.80, 0.55}, vein[3] = {0.25, 0.30, 0.42};
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      const double s = 0.5 + 0.5 * std::tanh(1.2 * fa[i * size + j] / sa);
      const double t = 0.5 + 0.5 * std::tanh(1.5 * fb[i * size + j] / sb - 1.0);
      const double light = 1.0 - ramp * (static_cast<double>(i + j) / static_cast<double>(2 * size));
      for (std::size_t c = 0; c < 3; ++c) {
        const double base = low[c] + (high[c] - low[c]) * s;
        img.at(i, j, c) = std::clamp(light * (base + (vein[c] - base) * 0.6 * t), 0.0, 1.0);
      }
    }
  }
  return img;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(20240611);

  const auto a = spectrum(rng, 160, 40.0, true, 1.4);
  const auto b = spectrum(rng, 80, 24.0, true, 1.2);
  pinr::save_png(render(256, a, b, 0.0), dir / "periodic_256.png");

  const auto pa = spectrum(rng, 120, 14.0, false, 1.3);
  const auto pb = spectrum(rng, 60, 9.0, false, 1.2);
  pinr::save_png(render(128, pa, pb, 0.35), dir / "patch_128.png");

  const auto ta = spectrum(rng, 60, 10.0, true, 1.3);
  const auto tb = spectrum(rng, 30, 6.0, true, 1.2);
  pinr::save_png(pinr::tile(render(64, ta, tb, 0.0), 2, 2), dir / "repeat_128.png");

  std::printf("wrote textures to %s\n", dir.c_str());
  return 0;
}
