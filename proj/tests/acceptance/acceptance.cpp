// Acceptance suite: one line per criterion with the measured value, the
// threshold and the runtime. Criteria can be selected by number on the
// command line; the default runs all of them. Exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pinr/baseline.hpp"
#include "pinr/model_io.hpp"
#include "pinr/runtime.hpp"
#include "pinr/trainer.hpp"

using namespace pinr;
using diff::Tensor;
using pinr::testing::gradient_error;
using pinr::testing::random_tensor;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string data_path(const char* name) { return std::string(PINR_DATA_DIR) + "/" + name; }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

Tensor shifted(Tensor x, double d1, double d2) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    x.at(r, 0) += d1;
    x.at(r, 1) += d2;
  }
  return x;
}

// Trained models of criteria 4, 6 and 7, encoded, for the determinism check.
std::map<int, std::vector<std::string>> g_models;

Outcome periodicity() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> band(1, 16), depth(1, 3);
  std::uniform_real_distribution<double> per(0.5, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int b1 = band(rng), b2 = band(rng);
    const Period p{per(rng), per(rng)};
    const std::size_t n = std::min<std::size_t>(64, band_size(b1, b2));
    const std::vector<std::size_t> hidden(static_cast<std::size_t>(depth(rng)), 32);
    const PeriodicInr net = init_periodic(n, {b1, b2, {}, rng()}, p, hidden, 3);
    const Tensor x = random_tensor({1000, 2}, rng, -10.0, 10.0);
    const Tensor y = forward(net, x);
    worst = std::max(worst, max_abs_diff(y, forward(net, shifted(x, p.p1, p.p2))));
    worst = std::max(worst, max_abs_diff(y, forward(net, shifted(x, p.p1, 0.0))));
    worst = std::max(worst, max_abs_diff(y, forward(net, shifted(x, 0.0, p.p2))));
  }
  return {worst <= 1e-9, fmt("max |f(x)-f(x+P)| = %.3g over 50 nets x 1000 points (<= 1e-9)", worst)};
}

double loss_value(const MrNet& net, const LossBatch& batch) {
  diff::Tape tape;
  std::vector<StageHandle> handles;
  for (const auto& s : net.stages) handles.push_back({&s, bind_constants(tape, s)});
  return loss_eval(tape, handles, batch).loss.value().item();
}

Outcome loss_gradients() {
  MrNet net = init_mrnet({{3, 3, 12, {16}}, {6, 6, 24, {16}}}, Period{}, 3, 202);
  std::mt19937_64 rng(203);
  LossBatch batch;
  batch.coords = random_tensor({64, 2}, rng);
  batch.target = random_tensor({64, 3}, rng, 0.0, 1.0);
  batch.guidance_x = random_tensor({64, 3}, rng);
  batch.guidance_y = random_tensor({64, 3}, rng);
  batch.lambda = random_tensor({64, 1}, rng, 0.0, 1.0);

  diff::Tape tape;
  std::vector<StageHandle> handles;
  diff::ParameterList slots;
  std::uint32_t id = 0;
  for (auto& s : net.stages) {
    handles.push_back({&s, bind_parameters(tape, s, id)});
    append_parameter_slots(s, id, slots);
    id += static_cast<std::uint32_t>(trainable_tensor_count(s));
  }
  const diff::GradientMap grads = tape.backward(loss_eval(tape, handles, batch).loss);

  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const diff::ParamSlot& slot = slots[rng() % slots.size()];
    const std::size_t k = rng() % slot.tensor->size();
    double& v = (*slot.tensor)[k];
    const double saved = v, h = 1e-6;
    v = saved + h;
    const double up = loss_value(net, batch);
    v = saved - h;
    const double down = loss_value(net, batch);
    v = saved;
    worst = std::max(worst, gradient_error(grads.at(slot.id)[k], (up - down) / (2.0 * h)));
  }
  return {worst <= 1e-5, fmt("max relative error = %.3g over 20 parameters (<= 1e-5)", worst)};
}

Outcome spatial_jacobian_check() {
  const PeriodicInr net = init_periodic(40, {5, 5, {}, 301}, Period{}, {32, 32}, 3);
  std::mt19937_64 rng(302);
  const Tensor x = random_tensor({500, 2}, rng, -1.0, 1.0);
  const Tensor j = spatial_jacobian(net, x);
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t a = 0; a < 2; ++a) {
    const Tensor up = forward(net, shifted(x, a == 0 ? h : 0.0, a == 1 ? h : 0.0));
    const Tensor down = forward(net, shifted(x, a == 0 ? -h : 0.0, a == 1 ? -h : 0.0));
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double fd = (up.at(r, c) - down.at(r, c)) / (2.0 * h);
        worst = std::max(worst, gradient_error(j[(r * 3 + c) * 2 + a], fd));
      }
    }
  }
  return {worst <= 1e-6, fmt("max relative error = %.3g over 500 points (<= 1e-6)", worst)};
}

std::string fit_texture() {
  ImageGrid img = load_png(data_path("periodic_256.png"));
  MrNet net = init_mrnet({{4, 4, 40, {64}}, {16, 16, 160, {128}}, {64, 64, 512, {128}}}, Period{}, 3, 1);
  TrainConfig cfg;
  cfg.stage_epochs = {100, 100, 100};
  cfg.learning_rate = 2e-3;
  cfg.batch_pixels = 8192;
  const TrainReport rep = train(net, img, cfg);
  std::printf("    texture: %.2f dB after %.0f s\n", rep.final_psnr, rep.wall_seconds);
  return encode_model(net);
}

Outcome fit_quality() {
  const std::string bytes = fit_texture();
  const MrNet net = decode_model(bytes);
  const ImageGrid img = load_png(data_path("periodic_256.png"));
  const double texture = psnr(sample_grid(net, img.domain, 256, 256, 3.0), img);
  g_models[4].push_back(bytes);

  ImageGrid wave(64, 64, 3);
  for (std::size_t i = 0; i < 64; ++i) {
    for (std::size_t j = 0; j < 64; ++j) {
      const double v = 0.5 + 0.4 * std::sin(kTwoPi * wave.x_of(j));
      for (std::size_t c = 0; c < 3; ++c) wave.at(i, j, c) = v;
    }
  }
  MrNet harmonic = init_mrnet({{1, 1, 4, {64}}}, Period{1, 1}, 3, 7);
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.learning_rate = 1e-3;
  cfg.batch_pixels = 256;
  train(harmonic, wave, cfg);
  const double pure = psnr(sample_grid(harmonic, wave.domain, 64, 64, 1.0), wave);
  return {texture >= 28.0 && pure >= 50.0,
          fmt("texture PSNR = %.2f dB (>= 28), harmonic PSNR = %.2f dB (>= 50)", texture, pure)};
}

Outcome extrapolation() {
  const MrNet net = init_mrnet({{4, 4, 40, {64}}, {16, 16, 160, {128}}, {64, 64, 512, {128}}}, Period{}, 3, 501);
  const ImageGrid base = sample_raw(net, Domain{-1, -1, 1, 1}, 256, 256, 3.0);
  const ImageGrid large = sample_raw(net, Domain{-2, -2, 2, 2}, 512, 512, 3.0);
  // The 512 grid's cell centers sit half a tile off the tiled 256 grid's.
  const ImageGrid tiled = roll(tile(base, 2, 2), 128, 128);
  double worst = 0.0;
  for (std::size_t k = 0; k < large.data.size(); ++k) {
    worst = std::max(worst, std::abs(large.data[k] - tiled.data[k]));
  }
  return {worst <= 1e-9, fmt("max |sample - tiling| = %.3g (<= 1e-9)", worst)};
}

std::string seamless_patch(const ImageGrid& img) {
  MrNet net = init_mrnet({{4, 4, 40, {64}}, {16, 16, 160, {128}}, {32, 32, 256, {128}}}, Period{}, 3, 5);
  TrainConfig cfg;
  cfg.mode = TrainMode::kSeamless;
  cfg.mask.kind = MaskKind::kSoft;
  cfg.epochs = 150;
  cfg.learning_rate = 1e-3;
  cfg.batch_pixels = 2048;
  const TrainReport rep = train(net, img, cfg);
  std::printf("    seamless: %.2f dB after %.0f s\n", rep.final_psnr, rep.wall_seconds);
  return encode_model(net);
}

Outcome seamlessness() {
  const ImageGrid img = load_png(data_path("patch_128.png"));
  const std::string bytes = seamless_patch(img);
  g_models[6].push_back(bytes);
  const MrNet net = decode_model(bytes);
  const double trained = seam_score(sample_grid(net, img.domain, 128, 128, 3.0));
  const double truth = seam_score(img);
  return {trained <= 2.0 && truth > 4.0,
          fmt("seam score trained = %.3f (<= 2), ground truth = %.3f (> 4)", trained, truth)};
}

std::string masked_fit(const ImageGrid& img) {
  MrNet net = init_mrnet({{3, 3, 24, {32}}, {6, 6, 48, {64}}, {12, 12, 80, {64}}}, Period{1, 1}, 3, 11);
  TrainConfig cfg;
  cfg.mask.kind = MaskKind::kPeriodicClass;
  cfg.seed = 11;
  cfg.epochs = 500;
  cfg.learning_rate = 2e-3;
  cfg.batch_pixels = 1024;
  train(net, img, cfg);
  return encode_model(net);
}

Outcome masked_reconstruction() {
  const ImageGrid img = load_png(data_path("repeat_128.png"));
  const std::string bytes = masked_fit(img);
  g_models[7].push_back(bytes);
  const ImageGrid out = sample_grid(decode_model(bytes), img.domain, 128, 128, 3.0);
  const MaskField drop = periodic_class_mask(128, 128, 2, 2, 11);
  double se = 0.0;
  std::size_t n = 0, dropped = 0;
  for (std::size_t p = 0; p < drop.values.size(); ++p) {
    if (drop.values[p] != 1.0) continue;
    ++dropped;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = out.data[p * 3 + c] - img.data[p * 3 + c];
      se += d * d;
      ++n;
    }
  }
  const double db = -10.0 * std::log10(se / static_cast<double>(n));
  const double fraction = static_cast<double>(dropped) / static_cast<double>(drop.values.size());
  return {db >= 25.0 && fraction == 0.25,
          fmt("PSNR on dropped pixels = %.2f dB (>= 25), dropped fraction = %.4f", db, fraction)};
}

double extrapolated_residual(const MrNet& net) {
  std::mt19937_64 rng(801);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  Tensor x({1000, 2});
  for (std::size_t r = 0; r < 1000;) {
    const double a = u(rng), b = u(rng);
    if (std::abs(a) <= 1.0 && std::abs(b) <= 1.0) continue;
    x.at(r, 0) = a;
    x.at(r, 1) = b;
    ++r;
  }
  const double t = static_cast<double>(net.size());
  return max_abs_diff(mrnet_eval(net, x, t), mrnet_eval(net, shifted(x, 2.0, 2.0), t));
}

Outcome siren_contrast() {
  const ImageGrid img = load_png(data_path("repeat_128.png"));
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.learning_rate = 1e-3;
  cfg.batch_pixels = 1024;
  cfg.seed = 4;
  MrNet periodic{{init_periodic(64, PeriodicIntegerInit{8, 8, {}, 4}, Period{2, 2}, {64}, 3)}};
  MrNet siren{{init_siren(64, SirenRandomInit{30.0, 4}, Period{2, 2}, {64}, 3)}};
  const TrainReport rp = train(periodic, img, cfg);
  const TrainReport rs = train(siren, img, cfg);
  const double a = extrapolated_residual(periodic), b = extrapolated_residual(siren);
  return {a <= 1e-9 && b > 1e-2,
          fmt("residual periodic = %.3g (<= 1e-9), SIREN = %.3g (> 1e-2); fit %.1f / %.1f dB", a, b,
              rp.final_psnr, rs.final_psnr)};
}

Outcome poisson_oracles() {
  std::mt19937_64 rng(901);
  std::uniform_real_distribution<double> u(-1.0, 1.0), v(0.0, 1.0);

  GuidanceField g{8, 8, 1, std::vector<double>(8 * 8 * 2)};
  for (double& x : g.values) x = u(rng);
  const Domain d{-1, -1, 1, 1};
  const PoissonResult torus = solve_torus(g, {0.0}, {1e-13, 1000}, d);
  const std::vector<double> torus_ref = pinr::testing::dense_torus_solve(g, d);
  double e_torus = 0.0;
  for (std::size_t k = 0; k < 64; ++k) e_torus = std::max(e_torus, std::abs(torus.image.data[k] - torus_ref[k]));

  ImageGrid small(8, 8, 1);
  for (double& x : small.data) x = v(rng);
  const PoissonResult border = solve_average_border(small, {1e-13, 1000});
  const std::vector<double> border_ref = pinr::testing::dense_average_border_solve(small);
  double e_border = 0.0;
  for (std::size_t k = 0; k < 64; ++k) e_border = std::max(e_border, std::abs(border.image.data[k] - border_ref[k]));

  ImageGrid img(48, 40, 3);
  for (double& x : img.data) x = v(rng);
  std::vector<double> mean(3, 0.0);
  for (std::size_t p = 0; p < img.pixels(); ++p) {
    for (std::size_t c = 0; c < 3; ++c) mean[c] += img.data[p * 3 + c] / static_cast<double>(img.pixels());
  }
  const PoissonResult rec = solve_torus(forward_gradient(img, true), mean, {1e-12, 5000}, img.domain);
  double e_rec = 0.0;
  for (std::size_t k = 0; k < img.data.size(); ++k) e_rec = std::max(e_rec, std::abs(rec.image.data[k] - img.data[k]));

  return {e_torus <= 1e-8 && e_border <= 1e-8 && e_rec <= 1e-6,
          fmt("torus vs dense = %.3g, average border vs dense = %.3g (<= 1e-8), recovery = %.3g (<= 1e-6)",
              e_torus, e_border, e_rec)};
}

Outcome determinism() {
  const ImageGrid patch = load_png(data_path("patch_128.png"));
  const ImageGrid repeat = load_png(data_path("repeat_128.png"));
  const std::map<int, std::function<std::string()>> runs{
      {4, [] { return fit_texture(); }},
      {6, [&] { return seamless_patch(patch); }},
      {7, [&] { return masked_fit(repeat); }}};
  std::string detail;
  bool pass = true;
  for (const auto& [criterion, rerun] : runs) {
    auto& models = g_models[criterion];
    while (models.size() < 2) models.push_back(rerun());
    const bool same = models[0] == models[1];
    pass = pass && same;
    detail += "criterion " + std::to_string(criterion) + (same ? " identical" : " DIFFERS") +
              (criterion == 7 ? "" : ", ");
  }
  return {pass, detail + " (bitwise model files)"};
}

struct Criterion {
  int number;
  const char* name;
  double limit_seconds;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();
  const std::vector<Criterion> all{
      {1, "periodicity", 10, periodicity},
      {2, "loss gradients", 30, loss_gradients},
      {3, "spatial Jacobian", 5, spatial_jacobian_check},
      {4, "fit quality", 900, fit_quality},
      {5, "extrapolation equals tiling", 10, extrapolation},
      {6, "seamlessness", 600, seamlessness},
      {7, "masked reconstruction", 600, masked_reconstruction},
      {8, "SIREN contrast", 900, siren_contrast},
      {9, "Poisson oracles", 5, poisson_oracles},
      {10, "determinism", 0, determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : all) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_seconds == 0 || secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::string limit = c.limit_seconds == 0 ? "" : fmt(" < %.0f s", c.limit_seconds);
    std::printf("[%s] %2d %s: %s; %.1f s%s\n", pass ? "PASS" : "FAIL", c.number, c.name, o.detail.c_str(),
                secs, limit.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
