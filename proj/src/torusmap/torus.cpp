#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "pinr/errors.hpp"
#include "pinr/torusmap.hpp"

namespace pinr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
Vec3 normalized(const Vec3& a) { return (1.0 / norm(a)) * a; }

double torus_distance(const Vec3& p, const TorusGeom& g) {
  const double ring = std::hypot(p[0], p[1]) - g.major;
  return std::hypot(ring, p[2]) - g.minor;
}

struct Hit {
  Vec3 point;
  Vec2 uv;
};

// Sphere tracing against the exact torus distance; the bounding sphere
// brackets the search interval.
std::optional<Hit> trace(const Vec3& origin, const Vec3& dir, const TorusGeom& g) {
  const double bound = g.major + g.minor;
  const double b = dot(origin, dir);
  const double c = dot(origin, origin) - bound * bound;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double far = -b + std::sqrt(disc);
  if (far < 0.0) return std::nullopt;
  double t = std::max(0.0, -b - std::sqrt(disc));
  const double eps = 1e-10 * bound;
  for (int step = 0; step < 4000 && t <= far; ++step) {
    const Vec3 p = origin + t * dir;
    const double d = torus_distance(p, g);
    if (d < eps) {
      Hit h;
      h.point = p;
      double u = std::atan2(p[1], p[0]) / kTwoPi;
      double v = std::atan2(p[2], std::hypot(p[0], p[1]) - g.major) / kTwoPi;
      if (u < 0.0) u += 1.0;
      if (v < 0.0) v += 1.0;
      h.uv = {u >= 1.0 ? 0.0 : u, v >= 1.0 ? 0.0 : v};
      return h;
    }
    t += d;
  }
  return std::nullopt;
}

double wrapped(double d) { return d - std::round(d); }

struct Frame {
  Vec3 origin, forward, right, up;
  double half_h, half_w;
  std::size_t width, height;

  Vec3 ray(double x, double y) const {
    const double sx = (2.0 * x / static_cast<double>(width) - 1.0) * half_w;
    const double sy = (1.0 - 2.0 * y / static_cast<double>(height)) * half_h;
    return normalized(forward + sx * right + sy * up);
  }
};

Frame make_frame(const Scene& scene) {
  const Camera& cam = scene.camera;
  const TorusGeom& g = scene.geom;
  if (!(g.major > g.minor && g.minor > 0.0)) {
    throw ConfigError("torus radii must satisfy R > r > 0");
  }
  if (!(g.uv_scale[0] > 0.0 && g.uv_scale[1] > 0.0)) throw ConfigError("uv scale must be positive");
  if (!(cam.fov_y > 0.0 && cam.fov_y < std::numbers::pi)) {
    throw ConfigError("field of view must lie in (0, pi)");
  }
  if (cam.width == 0 || cam.height == 0) throw ConfigError("image resolution must be positive");
  if (!(scene.texture_res > 0.0)) throw ConfigError("texture resolution must be positive");
  if (torus_distance(cam.eye, g) <= 0.0) throw ConfigError("camera is inside the torus tube");
  const Vec3 view = cam.target - cam.eye;
  if (norm(view) == 0.0) throw ConfigError("camera eye and target coincide");
  Frame f;
  f.origin = cam.eye;
  f.forward = normalized(view);
  const Vec3 side = cross(f.forward, cam.up);
  if (norm(side) < 1e-12) throw ConfigError("camera up vector is parallel to the view direction");
  f.right = normalized(side);
  f.up = cross(f.right, f.forward);
  f.half_h = std::tan(0.5 * cam.fov_y);
  f.half_w = f.half_h * static_cast<double>(cam.width) / static_cast<double>(cam.height);
  f.width = cam.width;
  f.height = cam.height;
  return f;
}

}  // namespace

Vec2 uv_to_domain(double u, double v, const TorusGeom& geom) {
  return {2.0 * geom.uv_scale[0] * (2.0 * u - 1.0), geom.uv_scale[1] * (2.0 * v - 1.0)};
}

double lod_select(const Vec2& d_dx, const Vec2& d_dy, double texture_res, std::size_t n) {
  const double footprint = std::max(std::hypot(d_dx[0], d_dx[1]), std::hypot(d_dy[0], d_dy[1]));
  const double top = static_cast<double>(n);
  if (!(footprint > 0.0)) return top;
  return std::clamp(top - std::log2(footprint * texture_res), 0.0, top);
}

TorusRender rasterize_torus(const MrNet& net, const Scene& scene) {
  net.validate();
  const Frame frame = make_frame(scene);
  const TorusGeom& g = scene.geom;
  const std::size_t w = frame.width, h = frame.height, count = w * h;
  const Period period = net.period();
  // Periods traversed per unit of u and v.
  const double su = 4.0 * g.uv_scale[0] / period.p1, sv = 2.0 * g.uv_scale[1] / period.p2;
  const Vec3 light = normalized(scene.light);

  TorusRender out;
  out.image = ImageGrid(h, w, 4);
  out.hit.assign(count, 0);
  out.uv.assign(count, Vec2{0.0, 0.0});
  out.lod.assign(count, 0.0);
  std::vector<double> shade(count, 0.0);

#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const double x = static_cast<double>(j) + 0.5, y = static_cast<double>(i) + 0.5;
      const auto hit = trace(frame.origin, frame.ray(x, y), g);
      if (!hit) continue;
      const std::size_t p = i * w + j;
      out.hit[p] = 1;
      out.uv[p] = hit->uv;

      auto footprint = [&](double dx, double dy) -> Vec2 {
        for (double s : {1.0, -1.0}) {
          const auto n = trace(frame.origin, frame.ray(x + s * dx, y + s * dy), g);
          if (n) return {s * wrapped(n->uv[0] - hit->uv[0]) * su, s * wrapped(n->uv[1] - hit->uv[1]) * sv};
        }
        return {0.0, 0.0};
      };
      out.lod[p] = lod_select(footprint(1.0, 0.0), footprint(0.0, 1.0), scene.texture_res, net.size());

      const Vec3& q = hit->point;
      const double ring = std::hypot(q[0], q[1]);
      const Vec3 center = ring > 0.0 ? Vec3{q[0] * g.major / ring, q[1] * g.major / ring, 0.0}
                                     : Vec3{g.major, 0.0, 0.0};
      const Vec3 normal = normalized(q - center);
      shade[p] = scene.ambient + (1.0 - scene.ambient) * std::max(0.0, dot(normal, light));
    }
  }

  std::vector<std::size_t> hits;
  for (std::size_t p = 0; p < count; ++p) {
    if (out.hit[p]) hits.push_back(p);
  }
  if (hits.empty()) return out;
  diff::Tensor coords({hits.size(), 2});
  for (std::size_t k = 0; k < hits.size(); ++k) {
    const Vec2 d = uv_to_domain(out.uv[hits[k]][0], out.uv[hits[k]][1], g);
    coords.at(k, 0) = d[0];
    coords.at(k, 1) = d[1];
  }
  const std::vector<diff::Tensor> stages = stage_outputs(net, coords, net.size());
  const std::size_t c = net.channels();
  ImageGrid colors(hits.size(), 1, c);
  for (std::size_t k = 0; k < hits.size(); ++k) {
    const std::vector<double> weights = blend_weights(out.lod[hits[k]], net.size());
    for (std::size_t s = 0; s < stages.size(); ++s) {
      if (weights[s] == 0.0) continue;
      for (std::size_t ch = 0; ch < c; ++ch) colors.data[k * c + ch] += weights[s] * stages[s].at(k, ch);
    }
  }
  if (c == 3) colors = from_color_space(colors, scene.color);
  colors = clamp01(std::move(colors));
  for (std::size_t k = 0; k < hits.size(); ++k) {
    const std::size_t p = hits[k];
    for (std::size_t ch = 0; ch < 3; ++ch) {
      out.image.data[p * 4 + ch] = shade[p] * colors.data[k * c + (c == 3 ? ch : 0)];
    }
    out.image.data[p * 4 + 3] = 1.0;
  }
  return out;
}

}  // namespace pinr
