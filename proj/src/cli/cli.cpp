#include "pinr/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pinr/baseline.hpp"
#include "pinr/errors.hpp"
#include "pinr/image.hpp"
#include "pinr/model_io.hpp"
#include "pinr/mrnet.hpp"
#include "pinr/torusmap.hpp"
#include "pinr/trainer.hpp"

namespace pinr {

namespace {

// Usage problems detected after CLI11 parsing (bad combinations, config keys).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  std::string color = "ycbcr";

  // architecture
  std::size_t stages = 0;
  std::vector<int> bands;
  std::vector<std::size_t> widths;
  std::vector<std::size_t> hidden;
  std::vector<double> period{2.0, 2.0};
  std::string init = "periodic";
  double omega0 = 30.0;

  // training
  std::string image;
  std::string model;
  std::string out;
  std::string report;
  std::vector<int> epochs{100};
  double lr = 1e-4;
  std::size_t batch = 65536;
  std::string mask;
  std::size_t margin = 8;
  double gamma = 2.0;
  double lp = 2.0;
  std::vector<std::size_t> repeats{2, 2};
  std::string guidance = "clamp";
  double value_weight = 1.0;
  double jacobian_weight = 1.0;

  // sampling and rendering
  std::vector<double> domain{-1.0, -1.0, 1.0, 1.0};
  std::vector<std::size_t> res{256};
  double level = -1.0;
  std::string mode = "torus";
  double tol = 1e-8;
  std::size_t max_iter = 20000;
  std::vector<double> radii{2.0, 1.0};
  std::vector<double> uv_scale{1.0, 1.0};
  std::vector<double> eye{0.0, -7.0, 4.0};
  std::vector<double> target{0.0, 0.0, 0.0};
  std::vector<double> light{-0.4, -0.5, 0.77};
  double fov = 0.7;
  double texture_res = 256.0;

  std::vector<std::string> inputs;
};

ColorSpace parse_color(const std::string& s) { return s == "rgb" ? ColorSpace::kRgb : ColorSpace::kYCbCr; }

std::pair<std::size_t, std::size_t> resolution(const Options& o) {
  if (o.res.size() == 1) return {o.res[0], o.res[0]};
  if (o.res.size() == 2) return {o.res[1], o.res[0]};  // --res W H
  throw UsageError("--res takes one or two values");
}

Domain domain_of(const Options& o) {
  if (o.domain.size() != 4) throw UsageError("--domain takes four values x0 y0 x1 y1");
  const Domain d{o.domain[0], o.domain[1], o.domain[2], o.domain[3]};
  if (!(d.width() > 0.0 && d.height() > 0.0)) throw UsageError("--domain must have x1 > x0 and y1 > y0");
  return d;
}

Period period_of(const Options& o) {
  if (o.period.size() == 1) return {o.period[0], o.period[0]};
  if (o.period.size() == 2) return {o.period[0], o.period[1]};
  throw UsageError("--period takes one or two values");
}

std::vector<StageConfig> stage_layout(const Options& o) {
  const std::vector<StageConfig> table = table1_stages();
  std::vector<StageConfig> stages;
  if (o.bands.empty()) {
    const std::size_t n = o.stages == 0 ? table.size() : o.stages;
    if (n > table.size()) throw UsageError("without --bands at most 6 stages are available");
    stages.assign(table.begin(), table.begin() + static_cast<std::ptrdiff_t>(n));
  } else {
    if (o.stages != 0 && o.stages != o.bands.size()) {
      throw UsageError("--stages disagrees with the number of --bands");
    }
    for (std::size_t i = 0; i < o.bands.size(); ++i) {
      StageConfig s = i < table.size() ? table[i] : table.back();
      s.band1 = s.band2 = o.bands[i];
      stages.push_back(s);
    }
  }
  if (!o.widths.empty()) {
    if (o.widths.size() != stages.size()) throw UsageError("--widths needs one value per stage");
    for (std::size_t i = 0; i < stages.size(); ++i) stages[i].freq_count = o.widths[i];
  }
  if (!o.hidden.empty()) {
    if (o.hidden.size() != 1 && o.hidden.size() != stages.size()) {
      throw UsageError("--hidden needs one value or one per stage");
    }
    for (std::size_t i = 0; i < stages.size(); ++i) {
      stages[i].hidden_widths = {o.hidden.size() == 1 ? o.hidden[0] : o.hidden[i]};
    }
  }
  return stages;
}

MrNet build_net(const Options& o, std::size_t channels) {
  const std::vector<StageConfig> layout = stage_layout(o);
  const Period period = period_of(o);
  if (o.init == "periodic") return init_mrnet(layout, period, channels, o.seed);
  MrNet net;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    net.stages.push_back(init_siren(layout[i].freq_count, SirenRandomInit{o.omega0, stage_seed(o.seed, i)},
                                    period, layout[i].hidden_widths, channels));
  }
  return net;
}

void echo_config(CLI::App* sub, const Options& o, std::ostream& err) {
  err << "config: command=" << sub->get_name() << " seed=" << o.seed;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "seed" || opt->get_positional()) continue;
    const auto values = opt->reduced_results();
    std::string joined;
    for (const auto& v : values) joined += (joined.empty() ? "" : ",") + v;
    if (joined.empty()) {
      for (char ch : opt->get_default_str()) {
        if (ch != '[' && ch != ']' && ch != '{' && ch != '}') joined += ch;
      }
    }
    if (!joined.empty()) err << ' ' << name << '=' << joined;
  }
  err << '\n';
}

// Applies key=value lines to options of `sub` that were not given on the
// command line. Blank lines and lines starting with '#' are skipped.
void apply_config_file(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw UsageError(path + ":" + std::to_string(number) + ": unknown key '" + key + "' for " +
                       sub->get_name());
    }
    if (opt->count() > 0) continue;
    std::vector<std::string> parts;
    std::istringstream tokens(value);
    for (std::string t; tokens >> t;) parts.push_back(t);
    if (opt->get_expected_max() == 0) parts = {value.empty() ? "true" : value};
    opt->clear();
    opt->add_result(parts);
    opt->run_callback();
  }
}

void print_info(const MrNet& net, std::ostream& out) {
  out << "stages " << net.size() << ", channels " << net.channels() << ", period " << net.period().p1
      << " x " << net.period().p2 << (net.periodic() ? "" : " (nominal, non-periodic)") << '\n';
  out << "stage  max|k|   freqs  hidden       trainable  frozen\n";
  std::size_t trainable = 0, frozen = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const PeriodicInr& s = net.stages[i];
    std::string band = "-";
    if (s.frequencies) {
      int b1 = 0, b2 = 0;
      for (const IntFrequency& k : s.frequencies->multipliers()) {
        b1 = std::max(b1, std::abs(k.k1));
        b2 = std::max(b2, std::abs(k.k2));
      }
      band = "(" + std::to_string(b1) + "," + std::to_string(b2) + ")";
    }
    std::string hidden;
    for (const DenseLayer& l : s.hidden) hidden += (hidden.empty() ? "" : ",") + std::to_string(l.outputs());
    if (hidden.empty()) hidden = "-";
    const ParamCount pc = param_count(s);
    trainable += pc.trainable;
    frozen += pc.frozen;
    char line[160];
    std::snprintf(line, sizeof line, "%-6zu %-8s %-6zu %-12s %-10zu %zu\n", i, band.c_str(),
                  s.frequency_count(), hidden.c_str(), pc.trainable, pc.frozen);
    out << line;
  }
  out << "total trainable " << trainable << ", frozen " << frozen << ", all " << trainable + frozen
      << '\n';
}

std::string format_db(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_report(const TrainReport& rep, const Options& o, std::ostream& out) {
  if (!o.report.empty()) {
    std::ofstream f(o.report);
    if (!f) throw std::runtime_error("cannot write report " + o.report);
    rep.write(f);
  }
  out << "final_psnr " << format_db(rep.final_psnr) << " dB, wall " << rep.wall_seconds
      << " s, seed " << rep.seed << '\n';
}

TrainConfig train_config(const Options& o, TrainMode mode, std::ostream& err) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.seed = o.seed;
  cfg.learning_rate = o.lr;
  cfg.batch_pixels = o.batch;
  cfg.color = parse_color(o.color);
  cfg.value_weight = o.value_weight;
  cfg.jacobian_weight = o.jacobian_weight;
  cfg.period_aware_guidance = o.guidance == "wrap";
  cfg.log = &err;
  if (o.epochs.empty()) throw UsageError("--epochs needs a value");
  cfg.epochs = o.epochs.front();
  if (o.epochs.size() > 1) {
    if (mode == TrainMode::kSeamless) throw UsageError("seamless training takes a single --epochs value");
    cfg.stage_epochs = o.epochs;
    cfg.epochs = *std::max_element(o.epochs.begin(), o.epochs.end());
  }
  if (o.repeats.size() != 2) throw UsageError("--repeats takes two values");
  cfg.mask.margin = o.margin;
  cfg.mask.gamma = o.gamma;
  cfg.mask.p = o.lp;
  cfg.mask.repeats1 = o.repeats[0];
  cfg.mask.repeats2 = o.repeats[1];
  const std::string kind = o.mask.empty() ? (mode == TrainMode::kFit ? "none" : "soft") : o.mask;
  cfg.mask.kind = kind == "binary"     ? MaskKind::kBinary
                  : kind == "soft"     ? MaskKind::kSoft
                  : kind == "periodic" ? MaskKind::kPeriodicClass
                                       : MaskKind::kNone;
  return cfg;
}

ImageGrid load_training_image(const Options& o) {
  ImageGrid img = load_png(o.image);
  img.domain = domain_of(o);
  if (img.channels == 1) {
    ImageGrid rgb(img.height, img.width, 3, 0.0, img.domain);
    for (std::size_t p = 0; p < img.pixels(); ++p) {
      for (std::size_t c = 0; c < 3; ++c) rgb.data[p * 3 + c] = img.data[p];
    }
    return rgb;
  }
  return img;
}

int run_train(const Options& o, TrainMode mode, std::ostream& out, std::ostream& err) {
  const ImageGrid img = load_training_image(o);
  MrNet net = o.model.empty() ? build_net(o, 3) : load_model(o.model);
  const TrainReport rep = train(net, img, train_config(o, mode, err));
  save_model(net, o.out);
  write_report(rep, o, out);
  return 0;
}

int run_sample(const Options& o, std::ostream& out) {
  const MrNet net = load_model(o.model);
  const auto [h, w] = resolution(o);
  const double t = o.level < 0.0 ? static_cast<double>(net.size()) : o.level;
  const ImageGrid img = sample_grid(net, domain_of(o), h, w, t, parse_color(o.color));
  save_png(img, o.out);
  out << "wrote " << o.out << " (" << w << "x" << h << ", level " << t << ")\n";
  return 0;
}

int run_psnr(const Options& o, std::ostream& out) {
  if (o.inputs.size() != 2) throw UsageError("psnr needs exactly two images");
  const ImageGrid a = load_png(o.inputs[0]), b = load_png(o.inputs[1]);
  if (!a.same_shape(b)) throw ShapeError("images differ in shape");
  out << format_db(psnr(a, b)) << '\n';
  return 0;
}

int run_mask(const Options& o, std::ostream& out) {
  const auto [h, w] = resolution(o);
  const std::string kind = o.mask.empty() ? "soft" : o.mask;
  MaskField m;
  if (kind == "binary") {
    m = binary_border_mask(h, w, o.margin);
  } else if (kind == "soft") {
    m = soft_mask(h, w, o.gamma, o.lp);
  } else if (kind == "periodic") {
    if (o.repeats.size() != 2) throw UsageError("--repeats takes two values");
    m = periodic_class_mask(h, w, o.repeats[0], o.repeats[1], o.seed);
  } else {
    m = no_mask(h, w);
  }
  save_png(m.image(), o.out);
  out << "wrote " << o.out << '\n';
  return 0;
}

int run_baseline(const Options& o, std::ostream& out) {
  ImageGrid img = load_png(o.image);
  const PoissonOptions opts{o.tol, o.max_iter};
  PoissonResult r;
  if (o.mode == "torus") {
    std::vector<double> mean(img.channels, 0.0);
    for (std::size_t p = 0; p < img.pixels(); ++p) {
      for (std::size_t c = 0; c < img.channels; ++c) {
        mean[c] += img.data[p * img.channels + c] / static_cast<double>(img.pixels());
      }
    }
    r = solve_torus(forward_gradient(img, false), mean, opts, img.domain);
  } else {
    r = solve_average_border(img, opts);
  }
  save_png(r.image, o.out);
  out << "wrote " << o.out << " (" << o.mode << ", " << r.iterations << " iterations, seam score "
      << seam_score(clamp01(r.image)) << ")\n";
  return 0;
}

Vec3 vec3(const std::vector<double>& v, const char* flag) {
  if (v.size() != 3) throw UsageError(std::string(flag) + " takes three values");
  return {v[0], v[1], v[2]};
}

int run_render(const Options& o, std::ostream& out) {
  const MrNet net = load_model(o.model);
  Scene scene;
  if (o.radii.size() != 2 || o.uv_scale.size() != 2) {
    throw UsageError("--radii and --uv-scale take two values");
  }
  scene.geom.major = o.radii[0];
  scene.geom.minor = o.radii[1];
  scene.geom.uv_scale = {o.uv_scale[0], o.uv_scale[1]};
  scene.camera.eye = vec3(o.eye, "--eye");
  scene.camera.target = vec3(o.target, "--target");
  scene.camera.fov_y = o.fov;
  const auto [h, w] = resolution(o);
  scene.camera.width = w;
  scene.camera.height = h;
  scene.light = vec3(o.light, "--light");
  scene.color = parse_color(o.color);
  scene.texture_res = o.texture_res;
  const TorusRender r = rasterize_torus(net, scene);
  save_png(r.image, o.out);
  std::size_t hits = 0;
  double lod = 0.0;
  for (std::size_t p = 0; p < r.hit.size(); ++p) {
    if (r.hit[p]) {
      ++hits;
      lod += r.lod[p];
    }
  }
  out << "wrote " << o.out << " (" << hits << " surface pixels, mean level "
      << (hits ? lod / static_cast<double>(hits) : 0.0) << ")\n";
  return 0;
}

int run_init(const Options& o, std::ostream& out) {
  const MrNet net = build_net(o, 3);
  save_model(net, o.out);
  out << "wrote " << o.out << '\n';
  return 0;
}

void add_arch(CLI::App* sub, Options& o) {
  sub->add_option("--stages", o.stages, "Stage count (0: all stages of the default layout)");
  sub->add_option("--bands", o.bands, "Band limit per stage")->delimiter(',');
  sub->add_option("--widths", o.widths, "First-layer frequency count per stage")->delimiter(',');
  sub->add_option("--hidden", o.hidden, "Hidden width, one value or one per stage")->delimiter(',');
  sub->add_option("--period", o.period, "Period P1 [P2]")->expected(1, 2);
  sub->add_option("--init", o.init, "First-layer initialization")
      ->check(CLI::IsMember({"periodic", "siren"}));
  sub->add_option("--omega0", o.omega0, "SIREN frequency scale");
}

void add_color(CLI::App* sub, Options& o) {
  sub->add_option("--color", o.color, "Network color space")->check(CLI::IsMember({"ycbcr", "rgb"}));
}

void add_train(CLI::App* sub, Options& o, bool seamless) {
  sub->add_option("--image", o.image, "Training image (PNG)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "Output model file")->required();
  sub->add_option("--model", o.model, "Start from this model instead of a fresh one");
  sub->add_option("--report", o.report, "Write the per-epoch loss curve (CSV)");
  sub->add_option("--epochs", o.epochs, "Epochs, one value or one per stage")->delimiter(',');
  sub->add_option("--lr", o.lr, "Adam learning rate");
  sub->add_option("--batch", o.batch, "Pixels per optimizer step");
  sub->add_option("--domain", o.domain, "Image domain x0 y0 x1 y1")->expected(4);
  if (seamless) {
    sub->add_option("--mask", o.mask, "Lambda mask (default soft)")
        ->check(CLI::IsMember({"none", "binary", "soft"}));
    sub->add_option("--mask-margin", o.margin, "Binary mask margin in pixels");
    sub->add_option("--gamma", o.gamma, "Soft mask exponent");
    sub->add_option("--lp", o.lp, "Soft mask norm order");
    sub->add_option("--guidance", o.guidance, "Guidance differences at the image border")
        ->check(CLI::IsMember({"clamp", "wrap"}));
    sub->add_option("--value-weight", o.value_weight, "Value term multiplier");
    sub->add_option("--jacobian-weight", o.jacobian_weight, "Jacobian term multiplier");
  } else {
    sub->add_option("--mask", o.mask, "Pixel mask (default none)")
        ->check(CLI::IsMember({"none", "periodic"}));
    sub->add_option("--repeats", o.repeats, "Periodic-class repeats r1 r2")->expected(2);
    sub->add_option("--value-weight", o.value_weight, "Value term multiplier");
  }
  add_arch(sub, o);
  add_color(sub, o);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Periodic sinusoidal networks for tileable textures", "pinr"};
  app.require_subcommand(1, 1);
  app.option_defaults()->always_capture_default();

  std::vector<CLI::App*> subs;
  auto add_sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", o.config, "key=value file applied before the command-line flags");
    s->add_option("--seed", o.seed, "Random seed");
    subs.push_back(s);
    return s;
  };

  CLI::App* fit = add_sub("fit", "Fit a multiresolution network to an image, stage by stage");
  add_train(fit, o, false);
  CLI::App* seamless = add_sub("seamless", "Train with the gradient-domain seamless loss");
  add_train(seamless, o, true);

  CLI::App* sample = add_sub("sample", "Render a model over a domain to PNG");
  sample->add_option("--model", o.model, "Model file")->required()->check(CLI::ExistingFile);
  sample->add_option("--out", o.out, "Output PNG")->required();
  sample->add_option("--domain", o.domain, "Domain x0 y0 x1 y1")->expected(4);
  sample->add_option("--res", o.res, "Resolution W [H]")->expected(1, 2);
  sample->add_option("--level", o.level, "Level of detail t (negative: finest)");
  add_color(sample, o);

  CLI::App* psnr_cmd = add_sub("psnr", "PSNR between two PNG images in dB");
  psnr_cmd->add_option("images", o.inputs, "Two PNG files")->required()->expected(2)->check(CLI::ExistingFile);

  CLI::App* mask = add_sub("mask", "Write a mask as a grayscale PNG");
  mask->add_option("--mask", o.mask, "Mask kind")->check(CLI::IsMember({"none", "binary", "soft", "periodic"}));
  mask->add_option("--res", o.res, "Resolution W [H]")->expected(1, 2);
  mask->add_option("--mask-margin", o.margin, "Binary mask margin in pixels");
  mask->add_option("--gamma", o.gamma, "Soft mask exponent");
  mask->add_option("--lp", o.lp, "Soft mask norm order");
  mask->add_option("--repeats", o.repeats, "Periodic-class repeats r1 r2")->expected(2);
  mask->add_option("--out", o.out, "Output PNG")->required();

  CLI::App* base = add_sub("poisson-baseline", "Make an image tileable with a pixel-space Poisson solve");
  base->add_option("--image", o.image, "Input PNG")->required()->check(CLI::ExistingFile);
  base->add_option("--out", o.out, "Output PNG")->required();
  base->add_option("--mode", o.mode, "Solver")->check(CLI::IsMember({"torus", "average-border"}));
  base->add_option("--tol", o.tol, "Relative residual tolerance");
  base->add_option("--max-iter", o.max_iter, "Conjugate gradient iteration limit");

  CLI::App* render = add_sub("render-torus", "Texture-map a model onto a ray-traced torus");
  render->add_option("--model", o.model, "Model file")->required()->check(CLI::ExistingFile);
  render->add_option("--out", o.out, "Output PNG (RGBA)")->required();
  render->add_option("--res", o.res, "Resolution W [H]")->expected(1, 2);
  render->add_option("--radii", o.radii, "Major and minor radius")->expected(2);
  render->add_option("--uv-scale", o.uv_scale, "Texture repeats along u and v")->expected(2);
  render->add_option("--eye", o.eye, "Camera position")->expected(3);
  render->add_option("--target", o.target, "Camera look-at point")->expected(3);
  render->add_option("--fov", o.fov, "Vertical field of view in radians");
  render->add_option("--light", o.light, "Direction towards the light")->expected(3);
  render->add_option("--texture-res", o.texture_res, "Texels per period for level selection");
  add_color(render, o);

  CLI::App* info = add_sub("info", "Print the architecture and parameter counts of a model");
  info->add_option("--model", o.model, "Model file")->required()->check(CLI::ExistingFile);

  CLI::App* init = add_sub("init", "Write a freshly initialized model");
  init->add_option("--out", o.out, "Output model file")->required();
  add_arch(init, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  CLI::App* sub = nullptr;
  for (CLI::App* s : subs) {
    if (s->parsed()) sub = s;
  }
  try {
    if (!o.config.empty()) apply_config_file(sub, o.config);
    echo_config(sub, o, err);
    if (sub == fit) return run_train(o, TrainMode::kFit, out, err);
    if (sub == seamless) return run_train(o, TrainMode::kSeamless, out, err);
    if (sub == sample) return run_sample(o, out);
    if (sub == psnr_cmd) return run_psnr(o, out);
    if (sub == mask) return run_mask(o, out);
    if (sub == base) return run_baseline(o, out);
    if (sub == render) return run_render(o, out);
    if (sub == info) {
      print_info(load_model(o.model), out);
      return 0;
    }
    return run_init(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pinr
