#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>

#include "pinr/tensor.hpp"

namespace pinr::diff {

// Identifies a trainable tensor across tapes and optimizer steps.
struct ParamId {
  std::uint32_t value = 0;
  auto operator<=>(const ParamId&) const = default;
};

using GradientMap = std::map<ParamId, Tensor>;

class Tape;

// Handle to a node on a tape. Cheap to copy; valid as long as the tape is not cleared.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t index = 0;

  const Tensor& value() const;
  const Shape& shape() const;
};

// Append-only record of tensor operations for reverse-mode differentiation.
// Node inputs always precede the node, so a reverse sweep is a valid
// topological order. Not thread-safe; use one tape per thread.
class Tape {
 public:
  enum class Op : std::uint8_t {
    kLeaf,
    kMatmul,
    kMatmulBt,
    kAdd,
    kSub,
    kMul,
    kScale,
    kSin,
    kCos,
    kClamp01,
    kSum,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf that receives a gradient under `id`.
  Var parameter(ParamId id, Tensor value);

  const Tensor& value(Var v) const { return nodes_[v.index].value; }
  bool requires_grad(Var v) const { return nodes_[v.index].requires_grad; }
  Op op(Var v) const { return nodes_[v.index].op; }
  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // Gradients of a scalar node with respect to every parameter leaf on the
  // tape. Parameters the loss does not depend on get zero tensors.
  GradientMap backward(Var loss) const;

 private:
  friend Var record(Tape& tape, Op op, std::array<Var, 2> inputs, std::size_t arity,
                    double scalar, Tensor value, Tensor saved);

  struct Node {
    Op op = Op::kLeaf;
    std::array<std::uint32_t, 2> inputs{};
    std::uint8_t arity = 0;
    bool requires_grad = false;
    double scalar = 0.0;
    std::optional<ParamId> param;
    Tensor value;
    Tensor saved;  // cos(x) for sin nodes, -sin(x) for cos nodes
  };

  // deque keeps references from value() stable while recording.
  std::deque<Node> nodes_;
};

// a[m x k] * b[k x n]
Var matmul(Var a, Var b);
// a[m x k] * b[n x k]^T
Var matmul_bt(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var sin(Var a);
Var cos(Var a);
Var clamp01(Var a);
// Sum of all elements, shape [1].
Var sum(Var a);

}  // namespace pinr::diff
