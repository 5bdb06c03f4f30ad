#include "pinr/tape.hpp"

#include <vector>

#include "pinr/errors.hpp"
#include "pinr/kernels.hpp"

namespace pinr::diff {

namespace k = pinr::kernels;

const Tensor& Var::value() const { return tape->value(*this); }
const Shape& Var::shape() const { return tape->value(*this).shape(); }

Var record(Tape& tape, Tape::Op op, std::array<Var, 2> inputs, std::size_t arity, double scalar,
           Tensor value, Tensor saved) {
  Tape::Node node;
  node.op = op;
  node.arity = static_cast<std::uint8_t>(arity);
  node.scalar = scalar;
  for (std::size_t i = 0; i < arity; ++i) {
    if (inputs[i].tape != &tape) throw ContractError("operands recorded on different tapes");
    node.inputs[i] = inputs[i].index;
    node.requires_grad = node.requires_grad || tape.requires_grad(inputs[i]);
  }
  node.value = std::move(value);
  if (node.requires_grad) node.saved = std::move(saved);
  tape.nodes_.push_back(std::move(node));
  return Var{&tape, static_cast<std::uint32_t>(tape.nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
  value.set_requires_grad(false);
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::parameter(ParamId id, Tensor value) {
  value.set_requires_grad(true);
  Node node;
  node.requires_grad = true;
  node.param = id;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

namespace {

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) throw ShapeError(std::string(what) + " expects rank-2 operands, got " +
                                      shape_string(t.shape()));
}

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + " shape mismatch: " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

k::MatrixView view(const Tensor& t) { return k::MatrixView::of(t.data().data(), t.rows(), t.cols()); }

// grad += product, allocating grad on first use.
void accumulate_into(Tensor& grad, Tensor&& contribution) {
  if (grad.size() == 0) {
    grad = std::move(contribution);
  } else {
    k::accumulate(grad.data(), contribution.data());
  }
}

Tensor gemm_result(k::MatrixView a, k::MatrixView b) {
  Tensor out({a.rows, b.cols});
  k::gemm(a, b, out.data());
  return out;
}

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_matrix(x, "matmul");
  require_matrix(y, "matmul");
  if (x.cols() != y.rows()) {
    throw ShapeError("matmul shape mismatch: " + shape_string(x.shape()) + " * " +
                     shape_string(y.shape()));
  }
  return record(*a.tape, Tape::Op::kMatmul, {a, b}, 2, 0.0, gemm_result(view(x), view(y)), {});
}

Var matmul_bt(Var a, Var b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_matrix(x, "matmul_bt");
  require_matrix(y, "matmul_bt");
  if (x.cols() != y.cols()) {
    throw ShapeError("matmul_bt shape mismatch: " + shape_string(x.shape()) + " * " +
                     shape_string(y.shape()) + "^T");
  }
  return record(*a.tape, Tape::Op::kMatmulBt, {a, b}, 2, 0.0,
                gemm_result(view(x), view(y).transposed()), {});
}

Var add(Var a, Var b) {
  require_same(a.value(), b.value(), "add");
  Tensor out(a.shape());
  k::add(a.value().data(), b.value().data(), out.data());
  return record(*a.tape, Tape::Op::kAdd, {a, b}, 2, 0.0, std::move(out), {});
}

Var sub(Var a, Var b) {
  require_same(a.value(), b.value(), "sub");
  Tensor out(a.shape());
  k::sub(a.value().data(), b.value().data(), out.data());
  return record(*a.tape, Tape::Op::kSub, {a, b}, 2, 0.0, std::move(out), {});
}

Var mul(Var a, Var b) {
  require_same(a.value(), b.value(), "mul");
  Tensor out(a.shape());
  k::mul(a.value().data(), b.value().data(), out.data());
  return record(*a.tape, Tape::Op::kMul, {a, b}, 2, 0.0, std::move(out), {});
}

Var scale(Var a, double s) {
  Tensor out(a.shape());
  k::scale(a.value().data(), s, out.data());
  return record(*a.tape, Tape::Op::kScale, {a, a}, 1, s, std::move(out), {});
}

Var sin(Var a) {
  Tensor out(a.shape());
  if (a.tape->requires_grad(a)) {
    Tensor c(a.shape());
    k::sincos(a.value().data(), out.data(), c.data());
    return record(*a.tape, Tape::Op::kSin, {a, a}, 1, 0.0, std::move(out), std::move(c));
  }
  k::sin(a.value().data(), out.data());
  return record(*a.tape, Tape::Op::kSin, {a, a}, 1, 0.0, std::move(out), {});
}

Var cos(Var a) {
  Tensor out(a.shape());
  if (a.tape->requires_grad(a)) {
    Tensor neg_sin(a.shape());
    k::sincos(a.value().data(), neg_sin.data(), out.data());
    k::scale(neg_sin.data(), -1.0, neg_sin.data());
    return record(*a.tape, Tape::Op::kCos, {a, a}, 1, 0.0, std::move(out), std::move(neg_sin));
  }
  k::cos(a.value().data(), out.data());
  return record(*a.tape, Tape::Op::kCos, {a, a}, 1, 0.0, std::move(out), {});
}

Var clamp01(Var a) {
  Tensor out(a.shape());
  k::clamp01(a.value().data(), out.data());
  return record(*a.tape, Tape::Op::kClamp01, {a, a}, 1, 0.0, std::move(out), {});
}

Var sum(Var a) {
  return record(*a.tape, Tape::Op::kSum, {a, a}, 1, 0.0, Tensor::scalar(k::sum(a.value().data())),
                {});
}

GradientMap Tape::backward(Var loss) const {
  if (loss.tape != this) throw ContractError("backward: loss node belongs to another tape");
  const Tensor& loss_value = value(loss);
  if (loss_value.size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        shape_string(loss_value.shape()));
  }

  GradientMap result;
  for (const Node& node : nodes_) {
    if (node.param && !result.contains(*node.param)) {
      result.emplace(*node.param, Tensor(node.value.shape(), 0.0));
    }
  }
  if (!nodes_[loss.index].requires_grad) return result;

  std::vector<Tensor> grads(loss.index + 1);
  grads[loss.index] = Tensor(loss_value.shape(), 1.0);

  for (std::size_t idx = loss.index + 1; idx-- > 0;) {
    const Node& node = nodes_[idx];
    Tensor& g = grads[idx];
    if (!node.requires_grad || g.size() == 0) continue;

    if (node.op == Op::kLeaf) {
      if (node.param) k::accumulate(result.at(*node.param).data(), g.data());
      g = Tensor();
      continue;
    }

    const Node& in0 = nodes_[node.inputs[0]];
    const Node* in1 = node.arity > 1 ? &nodes_[node.inputs[1]] : nullptr;
    Tensor* g0 = in0.requires_grad ? &grads[node.inputs[0]] : nullptr;
    Tensor* g1 = (in1 && in1->requires_grad) ? &grads[node.inputs[1]] : nullptr;

    switch (node.op) {
      case Op::kMatmul: {
        // c = a b: da = g b^T, db = a^T g
        if (g0) accumulate_into(*g0, gemm_result(view(g), view(in1->value).transposed()));
        if (g1) accumulate_into(*g1, gemm_result(view(in0.value).transposed(), view(g)));
        break;
      }
      case Op::kMatmulBt: {
        // c = a b^T: da = g b, db = g^T a
        if (g0) accumulate_into(*g0, gemm_result(view(g), view(in1->value)));
        if (g1) accumulate_into(*g1, gemm_result(view(g).transposed(), view(in0.value)));
        break;
      }
      case Op::kAdd:
      case Op::kSub: {
        if (g1) {
          if (g1->size() == 0) *g1 = Tensor(g.shape(), 0.0);
          k::accumulate_scaled(g1->data(), g.data(), node.op == Op::kAdd ? 1.0 : -1.0);
        }
        if (g0) {
          if (g0->size() == 0) *g0 = std::move(g); else k::accumulate(g0->data(), g.data());
        }
        break;
      }
      case Op::kMul: {
        if (g0) {
          if (g0->size() == 0) *g0 = Tensor(g.shape(), 0.0);
          k::accumulate_mul(g0->data(), g.data(), in1->value.data());
        }
        if (g1) {
          if (g1->size() == 0) *g1 = Tensor(g.shape(), 0.0);
          k::accumulate_mul(g1->data(), g.data(), in0.value.data());
        }
        break;
      }
      case Op::kScale: {
        if (g0->size() == 0) *g0 = Tensor(g.shape(), 0.0);
        k::accumulate_scaled(g0->data(), g.data(), node.scalar);
        break;
      }
      case Op::kSin:
      case Op::kCos: {
        if (g0->size() == 0) *g0 = Tensor(g.shape(), 0.0);
        k::accumulate_mul(g0->data(), g.data(), node.saved.data());
        break;
      }
      case Op::kClamp01: {
        if (g0->size() == 0) *g0 = Tensor(g.shape(), 0.0);
        const auto x = in0.value.data();
        auto dst = g0->data();
        for (std::size_t i = 0; i < x.size(); ++i) {
          if (x[i] > 0.0 && x[i] < 1.0) dst[i] += g[i];
        }
        break;
      }
      case Op::kSum: {
        if (g0->size() == 0) *g0 = Tensor(in0.value.shape(), 0.0);
        const double s = g[0];
        for (double& v : g0->data()) v += s;
        break;
      }
      case Op::kLeaf:
        break;
    }
    g = Tensor();  // release as soon as it has been propagated
  }
  return result;
}

}  // namespace pinr::diff
