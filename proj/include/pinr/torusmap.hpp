#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "pinr/image.hpp"
#include "pinr/mrnet.hpp"

namespace pinr {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

// Torus around the z axis: p(u, v) = ((R + r cos 2pi v) cos 2pi u,
// (R + r cos 2pi v) sin 2pi u, r sin 2pi v).
struct TorusGeom {
  double major = 2.0;
  double minor = 1.0;
  Vec2 uv_scale{1.0, 1.0};
};

struct Camera {
  Vec3 eye{0.0, -7.0, 4.0};
  Vec3 target{0.0, 0.0, 0.0};
  Vec3 up{0.0, 0.0, 1.0};
  double fov_y = 0.7;  // radians
  std::size_t width = 256;
  std::size_t height = 256;
};

struct Scene {
  TorusGeom geom;
  Camera camera;
  Vec3 light{-0.4, -0.5, 0.77};  // direction towards the light
  double ambient = 0.15;
  ColorSpace color = ColorSpace::kYCbCr;
  // Texels per period used by the level-of-detail rule.
  double texture_res = 256.0;
};

// (2 s_u (2u - 1), s_v (2v - 1)).
Vec2 uv_to_domain(double u, double v, const TorusGeom& geom);

// clamp(n - log2(max(|dx|, |dy|) * texture_res), 0, n); footprints in periods.
double lod_select(const Vec2& d_dx, const Vec2& d_dy, double texture_res, std::size_t n);

struct TorusRender {
  ImageGrid image;                // RGBA, alpha 0 on background
  std::vector<std::uint8_t> hit;  // per pixel
  std::vector<Vec2> uv;           // per pixel, in [0, 1)
  std::vector<double> lod;        // per pixel
};

// Ray-traced torus textured with `net` at per-pixel level of detail and
// Lambert shading. Rows run in parallel; the result does not depend on the
// thread count. Throws ConfigError for invalid geometry, a camera inside the
// tube or fov_y outside (0, pi).
TorusRender rasterize_torus(const MrNet& net, const Scene& scene);

}  // namespace pinr
