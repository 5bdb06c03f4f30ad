#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "pinr/adam.hpp"
#include "pinr/frequency.hpp"
#include "pinr/tape.hpp"
#include "pinr/tensor.hpp"

namespace pinr {

// Affine map with weight [out x in] (row-major, rows = outputs) and bias [1 x out].
struct DenseLayer {
  diff::Tensor weight;
  diff::Tensor bias;

  std::size_t inputs() const { return weight.cols(); }
  std::size_t outputs() const { return weight.rows(); }
};

// Sinusoidal network f(x) = c0 + C sin(W_L ... sin(W_1 sin(omega x + phi) + b_1) ... + b_L).
//
// The first layer (omega) is frozen. For periodic networks omega comes from an
// integer FrequencySet and f has period `frequencies.period()`; networks built by
// init_siren carry real-valued omega and no frequency set.
struct PeriodicInr {
  std::optional<FrequencySet> frequencies;
  diff::Tensor omega;   // n x 2
  diff::Tensor phase;   // 1 x n, trainable
  std::vector<DenseLayer> hidden;
  DenseLayer output;    // channels x width, bias 1 x channels
  Period period;        // nominal for SIREN networks

  bool periodic() const { return frequencies.has_value(); }
  std::size_t frequency_count() const { return omega.rows(); }
  std::size_t channels() const { return output.outputs(); }

  // Throws ShapeError when layer dimensions do not chain.
  void validate() const;
};

struct PeriodicIntegerInit {
  int band1 = 3;
  int band2 = 3;
  std::vector<IntFrequency> exclude;
  std::uint64_t seed = 0;
};

struct SirenRandomInit {
  double omega0 = 30.0;
  std::uint64_t seed = 0;
};

using InitMode = std::variant<PeriodicIntegerInit, SirenRandomInit>;

// Integer first layer: the freq_count lowest-norm members of the band minus
// `exclude`; phases ~ U(-pi, pi); hidden and output weights ~ U(+-sqrt(6/fan_in)),
// zero biases.
PeriodicInr init_periodic(std::size_t freq_count, const PeriodicIntegerInit& mode, Period period,
                          const std::vector<std::size_t>& hidden_widths, std::size_t channels);

// Same architecture with a SIREN first layer: omega ~ omega0 * U(-1/2, 1/2).
PeriodicInr init_siren(std::size_t freq_count, const SirenRandomInit& mode, Period period,
                       const std::vector<std::size_t>& hidden_widths, std::size_t channels);

PeriodicInr initialize(std::size_t freq_count, const InitMode& mode, Period period,
                       const std::vector<std::size_t>& hidden_widths, std::size_t channels);

// Builds an integer-frequency network around an explicit frequency set.
PeriodicInr init_with_frequencies(FrequencySet frequencies,
                                  const std::vector<std::size_t>& hidden_widths,
                                  std::size_t channels, std::uint64_t seed);

struct ParamCount {
  std::size_t trainable = 0;
  std::size_t frozen = 0;
  std::size_t total() const { return trainable + frozen; }
};

ParamCount param_count(const PeriodicInr& net);

// ---- evaluation on a tape -------------------------------------------------

// Tape handles for one network's tensors. Trainable tensors are parameters
// with consecutive ids (phase, W_1, b_1, ..., W_L, b_L, C, c0) or constants.
struct InrBinding {
  diff::Var omega;
  diff::Var phase;
  std::vector<diff::Var> weights;
  std::vector<diff::Var> biases;
  diff::Var out_weight;
  diff::Var out_bias;
};

std::size_t trainable_tensor_count(const PeriodicInr& net);
InrBinding bind_constants(diff::Tape& tape, const PeriodicInr& net);
InrBinding bind_parameters(diff::Tape& tape, const PeriodicInr& net, std::uint32_t first_id);
// Slots in the same id order as bind_parameters, for the optimizer.
void append_parameter_slots(PeriodicInr& net, std::uint32_t first_id, diff::ParameterList& out);

struct InrOutputs {
  diff::Var value;                                // B x channels
  std::optional<std::array<diff::Var, 2>> jacobian;  // d value / d x_a, each B x channels
};

// coords is B x 2; ones is a B x 1 column of ones used to broadcast bias rows.
InrOutputs evaluate(diff::Tape& tape, const PeriodicInr& net, const InrBinding& binding,
                    diff::Var coords, diff::Var ones, bool with_jacobian);

// ---- plain evaluation ------------------------------------------------------

// B x 2 -> B x channels. Pure; safe to call concurrently on a shared network.
diff::Tensor forward(const PeriodicInr& net, const diff::Tensor& coords);

// B x 2 -> [B, channels, 2] exact spatial Jacobian.
diff::Tensor spatial_jacobian(const PeriodicInr& net, const diff::Tensor& coords);

// Rows per tape when evaluating large batches.
inline constexpr std::size_t kEvalChunk = 4096;

}  // namespace pinr
