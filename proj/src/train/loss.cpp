#include <algorithm>

#include "pinr/errors.hpp"
#include "pinr/trainer.hpp"

namespace pinr {

using diff::Tensor;
using diff::Var;

namespace {

void require_rows(const Tensor& t, std::size_t rows, std::size_t cols, const char* name) {
  if (t.rank() != 2 || t.rows() != rows || t.cols() != cols) {
    throw ShapeError(std::string("loss batch field ") + name + " has shape " +
                     shape_string(t.shape()) + ", expected [" + std::to_string(rows) + "x" +
                     std::to_string(cols) + "]");
  }
}

// B x C matrix whose row r is f(lambda_r).
template <typename F>
Tensor row_weights(const Tensor& lambda, std::size_t channels, F f) {
  Tensor w({lambda.rows(), channels});
  for (std::size_t r = 0; r < lambda.rows(); ++r) {
    const double v = f(lambda[r]);
    for (std::size_t c = 0; c < channels; ++c) w.at(r, c) = v;
  }
  return w;
}

}  // namespace

LossParts loss_eval(diff::Tape& tape, const std::vector<StageHandle>& stages,
                    const LossBatch& batch, const LossWeights& weights, double normalizer) {
  if (stages.empty()) throw ContractError("loss needs at least one stage");
  const std::size_t rows = batch.coords.rows();
  const std::size_t channels = stages.front().net->channels();
  require_rows(batch.coords, rows, 2, "coords");
  require_rows(batch.target, rows, channels, "target");
  const bool has_lambda = batch.lambda.size() > 0;
  if (has_lambda) require_rows(batch.lambda, rows, 1, "lambda");
  const bool need_jacobian =
      weights.jacobian != 0.0 && has_lambda &&
      std::any_of(batch.lambda.data().begin(), batch.lambda.data().end(),
                  [](double v) { return v != 0.0; });
  if (need_jacobian) {
    require_rows(batch.guidance_x, rows, channels, "guidance_x");
    require_rows(batch.guidance_y, rows, channels, "guidance_y");
  }
  const double norm = normalizer > 0.0 ? normalizer : static_cast<double>(rows);

  Var x = tape.constant(batch.coords);
  Var ones = tape.constant(Tensor({rows, 1}, 1.0));
  Var f, jx, jy;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const InrOutputs out =
        evaluate(tape, *stages[s].net, stages[s].binding, x, ones, need_jacobian);
    f = s == 0 ? out.value : diff::add(f, out.value);
    if (need_jacobian) {
      jx = s == 0 ? (*out.jacobian)[0] : diff::add(jx, (*out.jacobian)[0]);
      jy = s == 0 ? (*out.jacobian)[1] : diff::add(jy, (*out.jacobian)[1]);
    }
  }

  LossParts parts;
  Var residual = diff::sub(tape.constant(batch.target), f);
  for (double r : residual.value().data()) parts.value_sse += r * r;
  Var squared = diff::mul(residual, residual);
  if (has_lambda) {
    squared = diff::mul(tape.constant(row_weights(batch.lambda, channels,
                                                  [](double l) { return 1.0 - l; })),
                        squared);
  }
  Var loss = diff::scale(diff::sum(squared), weights.value / norm);

  if (need_jacobian) {
    Var dx = diff::sub(jx, tape.constant(batch.guidance_x));
    Var dy = diff::sub(jy, tape.constant(batch.guidance_y));
    Var frob = diff::add(diff::mul(dx, dx), diff::mul(dy, dy));
    Var weighted = diff::mul(
        tape.constant(row_weights(batch.lambda, channels, [](double l) { return l; })), frob);
    loss = diff::add(loss, diff::scale(diff::sum(weighted), weights.jacobian / norm));
  }

  if (weights.anchor != 0.0) {
    // batch mean of the residual, weighted by this chunk's share of the batch
    Var mean = diff::matmul(tape.constant(Tensor({1, rows}, 1.0 / static_cast<double>(rows))),
                            residual);
    loss = diff::add(loss, diff::scale(diff::sum(diff::mul(mean, mean)),
                                       weights.anchor * static_cast<double>(rows) / norm));
  }
  parts.loss = loss;
  return parts;
}

}  // namespace pinr
