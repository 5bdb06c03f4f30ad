#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pinr/image.hpp"
#include "pinr/mrnet.hpp"
#include "pinr/tape.hpp"

namespace pinr {

// ---- masks -----------------------------------------------------------------

enum class MaskKind { kNone, kBinary, kSoft, kPeriodicClass };

// H x W weights in [0, 1]. For kPeriodicClass the values are a drop indicator
// (1 = pixel withheld from training); otherwise they are the lambda field.
struct MaskField {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;
  MaskKind kind = MaskKind::kNone;

  double at(std::size_t i, std::size_t j) const { return values[i * width + j]; }
  bool all_equal(double v) const;
  // Mask as a single-channel image (for PNG export).
  ImageGrid image() const;
};

MaskField no_mask(std::size_t height, std::size_t width);

// lambda = (||x - c||_p / ||corner - c||_p)^gamma on normalized pixel-center
// coordinates u = (j - (W-1)/2) / ((W-1)/2) and likewise v, so the center
// pixel is 0 and the corner pixels are 1.
MaskField soft_mask(std::size_t height, std::size_t width, double gamma, double p);

// 1 within `margin` pixels of an edge. 0 < margin <= ceil(min(H, W) / 2).
MaskField binary_border_mask(std::size_t height, std::size_t width, std::size_t margin);

// Drops exactly one pixel (seeded) from every class of pixels equivalent
// under translation by (H/r1) rows and (W/r2) columns.
MaskField periodic_class_mask(std::size_t height, std::size_t width, std::size_t r1,
                              std::size_t r2, std::uint64_t seed);

// ---- guidance ------------------------------------------------------------------

// Target Jacobian per pixel, channel and axis (0 = x along columns, 1 = y
// along rows), in color units per domain length.
struct GuidanceField {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j, std::size_t c, std::size_t axis) const {
    return values[((i * width + j) * channels + c) * 2 + axis];
  }
  double& at(std::size_t i, std::size_t j, std::size_t c, std::size_t axis) {
    return values[((i * width + j) * channels + c) * 2 + axis];
  }
};

// Central differences scaled by resolution / extent. With `period_aware`
// indices wrap around; otherwise border pixels use one-sided differences.
GuidanceField guidance_from_image(const ImageGrid& img, bool period_aware);

// ---- pyramid ----------------------------------------------------------------

struct Pyramid {
  std::vector<ImageGrid> levels;
  // Per level keep indicators (1 = usable); empty when every pixel is usable.
  std::vector<std::vector<std::uint8_t>> keep;
};

// Level n-1 is the source; each coarser level is the [1 4 6 4 1]/16 separable
// blur (wrapping at the borders) sampled at even indices. With a keep mask the
// blur is normalized over kept pixels so withheld pixels never leak into any
// level. Coarse grids are shifted by half a fine pixel so that cell centers
// coincide with the fine pixels they were sampled at. Throws ConfigError below 8x8.
Pyramid build_pyramid(const ImageGrid& img, std::size_t n,
                      const std::vector<std::uint8_t>& keep = {});

// ---- loss ---------------------------------------------------------------------

// One aligned batch. guidance_x/y and lambda may be empty when lambda is 0.
struct LossBatch {
  diff::Tensor coords;      // B x 2
  diff::Tensor target;      // B x C
  diff::Tensor guidance_x;  // B x C
  diff::Tensor guidance_y;  // B x C
  diff::Tensor lambda;      // B x 1
};

struct LossWeights {
  double jacobian = 1.0;
  double value = 1.0;
  // Penalty on the squared difference of batch means of f and the target.
  double anchor = 0.0;
};

struct StageHandle {
  const PeriodicInr* net = nullptr;
  InrBinding binding;
};

struct LossParts {
  diff::Var loss;
  double value_sse = 0.0;  // sum of squared value errors over the batch
};

// (1/normalizer) * sum over the batch of
//   w_J * lambda * ||J_f - U||_F^2 + w_v * (1 - lambda) * ||target - f||^2
// where f is the sum of the given stages. normalizer 0 means the batch size.
LossParts loss_eval(diff::Tape& tape, const std::vector<StageHandle>& stages,
                    const LossBatch& batch, const LossWeights& weights = {},
                    double normalizer = 0.0);

// ---- training -----------------------------------------------------------------

enum class TrainMode { kFit, kSeamless };

struct MaskConfig {
  MaskKind kind = MaskKind::kNone;
  std::size_t margin = 8;
  double gamma = 2.0;
  double p = 2.0;
  std::size_t repeats1 = 2;
  std::size_t repeats2 = 2;
};

struct TrainConfig {
  int epochs = 100;
  // Fit mode: epochs per stage; empty means `epochs` for every stage.
  std::vector<int> stage_epochs;
  std::size_t batch_pixels = 65536;
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;
  ColorSpace color = ColorSpace::kYCbCr;
  TrainMode mode = TrainMode::kFit;
  MaskConfig mask;
  bool period_aware_guidance = false;
  double value_weight = 1.0;
  double jacobian_weight = 1.0;
  std::ostream* log = nullptr;
};

struct EpochRecord {
  int epoch = 0;
  std::size_t stage = 0;
  double loss = 0.0;
  double psnr = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  double final_psnr = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;

  // "epoch,loss,psnr" header, then one line per epoch.
  void write(std::ostream& out) const;
  std::string to_string() const;
};

// Trains `net` on an RGB image whose domain spans a whole number of periods.
// Fit: stage i learns pyramid level i minus the frozen earlier stages, value
// loss only, skipping pixels dropped by a periodic-class mask. Seamless: all
// stages learn the full-resolution image under the lambda-weighted loss with
// guidance from guidance_from_image(image, cfg.period_aware_guidance).
// Throws TrainingError on a non-finite loss.
TrainReport train(MrNet& net, const ImageGrid& image, const TrainConfig& cfg);

// Rows per tape inside one optimizer batch; gradients are summed across them.
inline constexpr std::size_t kTrainChunk = 4096;

}  // namespace pinr
