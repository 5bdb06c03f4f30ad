#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "pinr/adam.hpp"
#include "pinr/errors.hpp"
#include "pinr/kernels.hpp"
#include "pinr/trainer.hpp"

namespace pinr {

using diff::Tensor;

void TrainReport::write(std::ostream& out) const {
  out << "epoch,loss,psnr\n";
  char line[96];
  for (const EpochRecord& r : epochs) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", r.epoch, r.loss, r.psnr);
    out << line;
  }
}

std::string TrainReport::to_string() const {
  std::ostringstream s;
  write(s);
  return s.str();
}

namespace {

// Pixel-indexed training data for one optimization phase.
struct Phase {
  std::vector<PeriodicInr*> stages;
  Tensor coords;   // P x 2
  Tensor targets;  // P x C
  Tensor guidance_x, guidance_y;  // P x C, or empty
  Tensor lambda;                  // P x 1, or empty
  std::vector<std::size_t> pixels;
  LossWeights weights;
  int epochs = 0;
  std::size_t stage_index = 0;
};

Tensor gather(const Tensor& src, const std::vector<std::size_t>& rows, std::size_t begin,
              std::size_t end) {
  const std::size_t cols = src.cols();
  Tensor out({end - begin, cols});
  for (std::size_t r = begin; r < end; ++r) {
    std::copy_n(src.data().begin() + static_cast<std::ptrdiff_t>(rows[r] * cols), cols,
                out.data().begin() + static_cast<std::ptrdiff_t>((r - begin) * cols));
  }
  return out;
}

Tensor image_rows(const ImageGrid& img) {
  return Tensor({img.pixels(), img.channels}, img.data);
}

void log_line(const TrainConfig& cfg, const std::string& text) {
  if (cfg.log) *cfg.log << text << '\n' << std::flush;
}

void run_phase(Phase& phase, const TrainConfig& cfg, int& epoch_counter, TrainReport& report) {
  diff::ParameterList params;
  std::vector<std::uint32_t> first_ids;
  std::uint32_t next_id = 0;
  for (PeriodicInr* s : phase.stages) {
    first_ids.push_back(next_id);
    append_parameter_slots(*s, next_id, params);
    next_id += static_cast<std::uint32_t>(trainable_tensor_count(*s));
  }
  diff::AdamState adam;
  adam.config.learning_rate = cfg.learning_rate;

  const std::size_t channels = phase.targets.cols();
  std::mt19937_64 rng(stage_seed(cfg.seed, 1000 + phase.stage_index));
  std::vector<std::size_t> order = phase.pixels;
  const std::size_t n = order.size();
  const int log_every = std::max(1, phase.epochs / 10);

  for (int e = 0; e < phase.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    const int epoch = ++epoch_counter;
    double loss_total = 0.0, sse_total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_pixels, ++batches) {
      const std::size_t stop = std::min(n, start + cfg.batch_pixels);
      const double batch_rows = static_cast<double>(stop - start);
      diff::GradientMap total;
      double batch_loss = 0.0;
      for (std::size_t c0 = start; c0 < stop; c0 += kTrainChunk) {
        const std::size_t c1 = std::min(stop, c0 + kTrainChunk);
        LossBatch batch;
        batch.coords = gather(phase.coords, order, c0, c1);
        batch.target = gather(phase.targets, order, c0, c1);
        if (phase.lambda.size() > 0) {
          batch.lambda = gather(phase.lambda, order, c0, c1);
          batch.guidance_x = gather(phase.guidance_x, order, c0, c1);
          batch.guidance_y = gather(phase.guidance_y, order, c0, c1);
        }
        diff::Tape tape;
        std::vector<StageHandle> handles;
        for (std::size_t s = 0; s < phase.stages.size(); ++s) {
          handles.push_back({phase.stages[s], bind_parameters(tape, *phase.stages[s], first_ids[s])});
        }
        const LossParts parts = loss_eval(tape, handles, batch, phase.weights, batch_rows);
        batch_loss += parts.loss.value().item();
        sse_total += parts.value_sse;
        diff::GradientMap grads = tape.backward(parts.loss);
        if (total.empty()) {
          total = std::move(grads);
        } else {
          for (auto& [id, g] : grads) kernels::accumulate(total.at(id).data(), g.data());
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batches),
                            epoch, batches);
      }
      loss_total += batch_loss;
      diff::adam_step(params, total, adam);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.stage = phase.stage_index;
    rec.loss = batches ? loss_total / static_cast<double>(batches) : 0.0;
    const double mse = sse_total / static_cast<double>(std::max<std::size_t>(1, n * channels));
    rec.psnr = mse > 0.0 ? -10.0 * std::log10(mse) : std::numeric_limits<double>::infinity();
    report.epochs.push_back(rec);
    if ((e + 1) % log_every == 0 || e + 1 == phase.epochs) {
      char line[128];
      std::snprintf(line, sizeof line, "stage %zu epoch %d loss %.6g psnr %.3f dB",
                    phase.stage_index, epoch, rec.loss, rec.psnr);
      log_line(cfg, line);
    }
  }
}

void check_domain(const MrNet& net, const ImageGrid& image) {
  const Period p = net.period();
  const double rx = image.domain.width() / p.p1, ry = image.domain.height() / p.p2;
  auto whole = [](double r) { return r >= 1.0 - 1e-9 && std::abs(r - std::round(r)) <= 1e-9; };
  if (!whole(rx) || !whole(ry)) {
    throw ConfigError("image domain must span a whole number of periods; got " +
                      std::to_string(rx) + " x " + std::to_string(ry));
  }
}

std::vector<std::size_t> kept_pixels(std::size_t count, const std::vector<std::uint8_t>& keep) {
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    if (keep.empty() || keep[p]) out.push_back(p);
  }
  return out;
}

void train_fit(MrNet& net, const ImageGrid& data, const TrainConfig& cfg, TrainReport& report) {
  std::vector<std::uint8_t> keep;
  if (cfg.mask.kind == MaskKind::kPeriodicClass) {
    const MaskField drop = periodic_class_mask(data.height, data.width, cfg.mask.repeats1,
                                               cfg.mask.repeats2, cfg.seed);
    keep.resize(drop.values.size());
    for (std::size_t p = 0; p < keep.size(); ++p) keep[p] = drop.values[p] == 0.0;
  } else if (cfg.mask.kind != MaskKind::kNone) {
    throw ConfigError("fit mode accepts only the periodic-class mask");
  }
  if (!cfg.stage_epochs.empty() && cfg.stage_epochs.size() != net.size()) {
    throw ConfigError("stage epoch list has " + std::to_string(cfg.stage_epochs.size()) +
                      " entries for " + std::to_string(net.size()) + " stages");
  }
  const Pyramid pyramid = build_pyramid(data, net.size(), keep);
  int epoch_counter = 0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const ImageGrid& level = pyramid.levels[i];
    Phase phase;
    phase.stages = {&net.stages[i]};
    phase.stage_index = i;
    phase.epochs = cfg.stage_epochs.empty() ? cfg.epochs : cfg.stage_epochs[i];
    phase.coords = grid_coordinates(level.domain, level.height, level.width);
    phase.targets = image_rows(level);
    for (const auto& g : stage_outputs(net, phase.coords, i)) {
      for (std::size_t k = 0; k < g.size(); ++k) phase.targets[k] -= g[k];
    }
    phase.pixels = kept_pixels(level.pixels(), keep.empty() ? keep : pyramid.keep[i]);
    phase.weights.value = cfg.value_weight;
    phase.weights.jacobian = 0.0;
    char line[128];
    std::snprintf(line, sizeof line, "stage %zu: %zux%zu target, %zu pixels, %d epochs", i,
                  level.height, level.width, phase.pixels.size(), phase.epochs);
    log_line(cfg, line);
    run_phase(phase, cfg, epoch_counter, report);
  }
}

void train_seamless(MrNet& net, const ImageGrid& data, const TrainConfig& cfg,
                    TrainReport& report) {
  MaskField lambda;
  switch (cfg.mask.kind) {
    case MaskKind::kNone: lambda = no_mask(data.height, data.width); break;
    case MaskKind::kBinary:
      lambda = binary_border_mask(data.height, data.width, cfg.mask.margin);
      break;
    case MaskKind::kSoft:
      lambda = soft_mask(data.height, data.width, cfg.mask.gamma, cfg.mask.p);
      break;
    case MaskKind::kPeriodicClass:
      throw ConfigError("seamless mode needs a binary, soft or no mask");
  }
  Phase phase;
  for (auto& s : net.stages) phase.stages.push_back(&s);
  phase.epochs = cfg.epochs;
  phase.coords = grid_coordinates(data.domain, data.height, data.width);
  phase.targets = image_rows(data);
  phase.lambda = Tensor({data.pixels(), 1}, lambda.values);
  const GuidanceField u = guidance_from_image(data, cfg.period_aware_guidance);
  phase.guidance_x = Tensor({data.pixels(), data.channels});
  phase.guidance_y = Tensor({data.pixels(), data.channels});
  for (std::size_t p = 0; p < data.pixels(); ++p) {
    for (std::size_t c = 0; c < data.channels; ++c) {
      phase.guidance_x[p * data.channels + c] = u.values[(p * data.channels + c) * 2];
      phase.guidance_y[p * data.channels + c] = u.values[(p * data.channels + c) * 2 + 1];
    }
  }
  phase.pixels.resize(data.pixels());
  std::iota(phase.pixels.begin(), phase.pixels.end(), std::size_t{0});
  phase.weights.value = cfg.value_weight;
  phase.weights.jacobian = cfg.jacobian_weight;
  if (lambda.all_equal(1.0)) {
    log_line(cfg, "warning: lambda is 1 everywhere; anchoring channel means with weight 1e-3");
    phase.weights.anchor = 1e-3;
  }
  phase.stage_index = net.size();
  int epoch_counter = 0;
  run_phase(phase, cfg, epoch_counter, report);
}

}  // namespace

TrainReport train(MrNet& net, const ImageGrid& image, const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (cfg.batch_pixels < 1) throw ConfigError("batch size must be at least 1");
  for (int e : cfg.stage_epochs) {
    if (e < 0) throw ConfigError("stage epochs must be nonnegative");
  }
  net.validate();
  if (net.channels() != image.channels) {
    throw ShapeError("network has " + std::to_string(net.channels()) + " channels, image has " +
                     std::to_string(image.channels));
  }
  check_domain(net, image);

  const auto t0 = std::chrono::steady_clock::now();
  TrainReport report;
  report.seed = cfg.seed;
  const ImageGrid data = to_color_space(image, cfg.color);
  if (cfg.mode == TrainMode::kFit) {
    train_fit(net, data, cfg, report);
  } else {
    train_seamless(net, data, cfg, report);
  }
  const ImageGrid render = sample_grid(net, image.domain, image.height, image.width,
                                       static_cast<double>(net.size()), cfg.color);
  report.final_psnr = psnr(render, image);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace pinr
