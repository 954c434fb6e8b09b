#include "ctsm/tensor/tape.hpp"

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

const Tensor& Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  bool any = false;
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw UsageError("operation mixes variables from different tapes");
    if (in.id() >= nodes_.size()) throw UsageError("operation input refers to a truncated node");
    node.inputs.push_back(in.id());
    any = any || nodes_[in.id()].requires_grad;
  }
  if (any && recording_) {
    node.requires_grad = true;
    node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& node = nodes_[id];
  if (!node.has_grad) {
    node.grad = Tensor(node.value.shape(), 0.0);
    node.has_grad = true;
  }
  return node.grad;
}

void Tape::backward(const Var& root) {
  if (&root.tape() != this) throw UsageError("backward root belongs to another tape");
  Node& r = nodes_[root.id()];
  if (r.value.size() != 1) {
    throw DimensionError(fmt::format("backward root must be a scalar, got shape {}",
                                     to_string(r.value.shape())));
  }
  if (!r.requires_grad) {
    throw UsageError("backward root has no recorded gradient path (recording disabled or no tracked inputs)");
  }
  grad_buffer(root.id())[0] += 1.0;
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.has_grad || !node.backward) continue;
    node.backward(*this, id);
  }
}

void Tape::zero_grad() {
  for (Node& node : nodes_) {
    node.has_grad = false;
    node.grad = Tensor();
  }
}

Tensor Tape::grad(const Var& v) const {
  const Node& node = nodes_[v.id()];
  if (!node.has_grad) return Tensor(node.value.shape(), 0.0);
  return node.grad;
}

void Tape::truncate(std::size_t mark) {
  if (mark < nodes_.size()) nodes_.resize(mark);
}

}  // namespace ctsm
