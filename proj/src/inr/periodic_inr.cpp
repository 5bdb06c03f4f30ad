#include "pinr/periodic_inr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pinr/errors.hpp"

namespace pinr {

using diff::Tape;
using diff::Tensor;
using diff::Var;

namespace {

constexpr std::uint64_t kWeightStream = 0x9e3779b97f4a7c15ULL;

Tensor uniform(diff::Shape shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = u(rng);
  return t;
}

// Phases, hidden and output layers; the first layer is set by the caller.
void init_trainable(PeriodicInr& net, std::size_t n, const std::vector<std::size_t>& hidden_widths,
                    std::size_t channels, std::mt19937_64& rng) {
  if (channels == 0) throw ConfigError("channel count must be positive");
  net.phase = uniform({1, n}, std::numbers::pi, rng);
  std::size_t fan_in = n;
  net.hidden.clear();
  for (std::size_t width : hidden_widths) {
    if (width == 0) throw ConfigError("hidden widths must be positive");
    DenseLayer layer;
    layer.weight = uniform({width, fan_in}, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
    layer.bias = Tensor({1, width}, 0.0);
    net.hidden.push_back(std::move(layer));
    fan_in = width;
  }
  net.output.weight = uniform({channels, fan_in}, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
  net.output.bias = Tensor({1, channels}, 0.0);
}

Tensor row_of(const Tensor& m, std::size_t col) {
  Tensor r({1, m.rows()});
  for (std::size_t i = 0; i < m.rows(); ++i) r[i] = m.at(i, col);
  return r;
}

}  // namespace

void PeriodicInr::validate() const {
  const std::size_t n = omega.rows();
  if (omega.rank() != 2 || omega.cols() != 2) throw ShapeError("omega must be n x 2");
  if (phase.shape() != diff::Shape{1, n}) throw ShapeError("phase must be 1 x n");
  if (frequencies && frequencies->size() != n) throw ShapeError("frequency set size mismatch");
  std::size_t width = n;
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    const DenseLayer& layer = hidden[l];
    if (layer.weight.rank() != 2 || layer.weight.cols() != width ||
        layer.bias.shape() != diff::Shape{1, layer.weight.rows()}) {
      throw ShapeError("hidden layer " + std::to_string(l) + " does not chain: weight " +
                       shape_string(layer.weight.shape()) + ", expected " + std::to_string(width) +
                       " inputs");
    }
    width = layer.weight.rows();
  }
  if (output.weight.rank() != 2 || output.weight.cols() != width ||
      output.bias.shape() != diff::Shape{1, output.weight.rows()}) {
    throw ShapeError("output layer does not match last hidden width " + std::to_string(width));
  }
}

PeriodicInr init_with_frequencies(FrequencySet frequencies,
                                  const std::vector<std::size_t>& hidden_widths,
                                  std::size_t channels, std::uint64_t seed) {
  PeriodicInr net;
  net.omega = frequencies.angular();
  net.period = frequencies.period();
  const std::size_t n = frequencies.size();
  net.frequencies = std::move(frequencies);
  std::mt19937_64 rng(seed ^ kWeightStream);
  init_trainable(net, n, hidden_widths, channels, rng);
  return net;
}

PeriodicInr init_periodic(std::size_t freq_count, const PeriodicIntegerInit& mode, Period period,
                          const std::vector<std::size_t>& hidden_widths, std::size_t channels) {
  std::vector<IntFrequency> pool = enumerate_band(mode.band1, mode.band2);
  if (!mode.exclude.empty()) {
    std::vector<IntFrequency> excluded = mode.exclude;
    std::sort(excluded.begin(), excluded.end());
    std::erase_if(pool, [&](const IntFrequency& k) {
      return std::binary_search(excluded.begin(), excluded.end(), k);
    });
  }
  auto chosen = select_lowest_norm(std::move(pool), freq_count, mode.seed);
  return init_with_frequencies(FrequencySet(std::move(chosen), period), hidden_widths, channels,
                               mode.seed);
}

PeriodicInr init_siren(std::size_t freq_count, const SirenRandomInit& mode, Period period,
                       const std::vector<std::size_t>& hidden_widths, std::size_t channels) {
  if (!(mode.omega0 >= 0.0)) throw ConfigError("omega0 must be nonnegative");
  PeriodicInr net;
  net.period = period;
  std::mt19937_64 rng(mode.seed ^ kWeightStream);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  net.omega = Tensor({freq_count, 2});
  for (double& v : net.omega.data()) v = mode.omega0 * u(rng);
  init_trainable(net, freq_count, hidden_widths, channels, rng);
  return net;
}

PeriodicInr initialize(std::size_t freq_count, const InitMode& mode, Period period,
                       const std::vector<std::size_t>& hidden_widths, std::size_t channels) {
  if (const auto* p = std::get_if<PeriodicIntegerInit>(&mode)) {
    return init_periodic(freq_count, *p, period, hidden_widths, channels);
  }
  return init_siren(freq_count, std::get<SirenRandomInit>(mode), period, hidden_widths, channels);
}

ParamCount param_count(const PeriodicInr& net) {
  ParamCount c;
  c.trainable = net.phase.size();
  for (const DenseLayer& layer : net.hidden) c.trainable += layer.weight.size() + layer.bias.size();
  c.trainable += net.output.weight.size() + net.output.bias.size();
  c.frozen = net.omega.size();
  return c;
}

std::size_t trainable_tensor_count(const PeriodicInr& net) { return 3 + 2 * net.hidden.size(); }

InrBinding bind_constants(Tape& tape, const PeriodicInr& net) {
  InrBinding b;
  b.omega = tape.constant(net.omega);
  b.phase = tape.constant(net.phase);
  for (const DenseLayer& layer : net.hidden) {
    b.weights.push_back(tape.constant(layer.weight));
    b.biases.push_back(tape.constant(layer.bias));
  }
  b.out_weight = tape.constant(net.output.weight);
  b.out_bias = tape.constant(net.output.bias);
  return b;
}

InrBinding bind_parameters(Tape& tape, const PeriodicInr& net, std::uint32_t first_id) {
  std::uint32_t id = first_id;
  auto next = [&] { return diff::ParamId{id++}; };
  InrBinding b;
  b.omega = tape.constant(net.omega);
  b.phase = tape.parameter(next(), net.phase);
  for (const DenseLayer& layer : net.hidden) {
    b.weights.push_back(tape.parameter(next(), layer.weight));
    b.biases.push_back(tape.parameter(next(), layer.bias));
  }
  b.out_weight = tape.parameter(next(), net.output.weight);
  b.out_bias = tape.parameter(next(), net.output.bias);
  return b;
}

void append_parameter_slots(PeriodicInr& net, std::uint32_t first_id, diff::ParameterList& out) {
  std::uint32_t id = first_id;
  out.push_back({diff::ParamId{id++}, &net.phase});
  for (DenseLayer& layer : net.hidden) {
    out.push_back({diff::ParamId{id++}, &layer.weight});
    out.push_back({diff::ParamId{id++}, &layer.bias});
  }
  out.push_back({diff::ParamId{id++}, &net.output.weight});
  out.push_back({diff::ParamId{id++}, &net.output.bias});
}

InrOutputs evaluate(Tape& tape, const PeriodicInr& net, const InrBinding& b, Var coords, Var ones,
                    bool with_jacobian) {
  using namespace diff;
  // first layer: s = sin(x omega^T + phi)
  Var pre = add(matmul_bt(coords, b.omega), matmul(ones, b.phase));
  Var h = sin(pre);

  std::array<Var, 2> tangent{};
  if (with_jacobian) {
    // d s / d x_a = cos(pre) * omega[:, a], broadcast over the batch
    Var c = cos(pre);
    for (std::size_t a = 0; a < 2; ++a) {
      Var omega_col = matmul(ones, tape.constant(row_of(net.omega, a)));
      tangent[a] = mul(c, omega_col);
    }
  }

  for (std::size_t l = 0; l < net.hidden.size(); ++l) {
    Var z = add(matmul_bt(h, b.weights[l]), matmul(ones, b.biases[l]));
    h = sin(z);
    if (with_jacobian) {
      Var cz = cos(z);
      for (auto& t : tangent) t = mul(cz, matmul_bt(t, b.weights[l]));
    }
  }

  InrOutputs out;
  out.value = add(matmul_bt(h, b.out_weight), matmul(ones, b.out_bias));
  if (with_jacobian) {
    out.jacobian = std::array<Var, 2>{matmul_bt(tangent[0], b.out_weight),
                                      matmul_bt(tangent[1], b.out_weight)};
  }
  return out;
}

namespace {

Tensor slice_rows(const Tensor& m, std::size_t begin, std::size_t end) {
  const std::size_t cols = m.cols();
  Tensor out({end - begin, cols});
  std::copy(m.data().begin() + static_cast<std::ptrdiff_t>(begin * cols),
            m.data().begin() + static_cast<std::ptrdiff_t>(end * cols), out.data().begin());
  return out;
}

void require_coords(const Tensor& coords) {
  if (coords.rank() != 2 || coords.cols() != 2) {
    throw ShapeError("coordinates must be B x 2, got " + shape_string(coords.shape()));
  }
}

}  // namespace

Tensor forward(const PeriodicInr& net, const Tensor& coords) {
  require_coords(coords);
  const std::size_t rows = coords.rows(), channels = net.channels();
  Tensor out({rows, channels});
  for (std::size_t begin = 0; begin < rows; begin += kEvalChunk) {
    const std::size_t end = std::min(rows, begin + kEvalChunk);
    Tape tape;
    auto binding = bind_constants(tape, net);
    Var x = tape.constant(slice_rows(coords, begin, end));
    Var ones = tape.constant(Tensor({end - begin, 1}, 1.0));
    const Tensor& v = evaluate(tape, net, binding, x, ones, false).value.value();
    std::copy(v.data().begin(), v.data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(begin * channels));
  }
  return out;
}

Tensor spatial_jacobian(const PeriodicInr& net, const Tensor& coords) {
  require_coords(coords);
  const std::size_t rows = coords.rows(), channels = net.channels();
  Tensor out({rows, channels, 2});
  for (std::size_t begin = 0; begin < rows; begin += kEvalChunk) {
    const std::size_t end = std::min(rows, begin + kEvalChunk);
    Tape tape;
    auto binding = bind_constants(tape, net);
    Var x = tape.constant(slice_rows(coords, begin, end));
    Var ones = tape.constant(Tensor({end - begin, 1}, 1.0));
    auto jac = *evaluate(tape, net, binding, x, ones, true).jacobian;
    for (std::size_t a = 0; a < 2; ++a) {
      const Tensor& j = jac[a].value();
      for (std::size_t r = 0; r < end - begin; ++r) {
        for (std::size_t c = 0; c < channels; ++c) {
          out[((begin + r) * channels + c) * 2 + a] = j.at(r, c);
        }
      }
    }
  }
  return out;
}

}  // namespace pinr
