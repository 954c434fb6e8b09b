#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctsm/tensor/tape.hpp"

namespace ctsm {

// Role of a parameter tensor; each role trains with its own learning rate.
enum class ParamGroup { embedding, dynamics, head };

std::string_view to_string(ParamGroup group);
ParamGroup param_group_from_string(std::string_view name);

struct Parameter {
  std::string name;
  ParamGroup group = ParamGroup::embedding;
  Tensor value;
};

// Named parameter tensors in insertion order.
class ParamSet {
 public:
  void add(std::string name, ParamGroup group, Tensor value);

  std::size_t size() const noexcept { return entries_.size(); }
  bool contains(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index(std::string_view name) const;

  Parameter& operator[](std::size_t i) { return entries_[i]; }
  const Parameter& operator[](std::size_t i) const { return entries_[i]; }
  Tensor& value(std::string_view name) { return entries_[index(name)].value; }
  const Tensor& value(std::string_view name) const { return entries_[index(name)].value; }

  std::vector<Parameter>& entries() noexcept { return entries_; }
  const std::vector<Parameter>& entries() const noexcept { return entries_; }

  std::size_t scalar_count() const noexcept;

 private:
  std::vector<Parameter> entries_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

// A ParamSet placed on a tape as leaves for one forward/backward pass.
class ParamBinding {
 public:
  ParamBinding(Tape& tape, const ParamSet& params, bool requires_grad = true);

  const Var& operator[](std::string_view name) const;
  const Var& at(std::size_t i) const { return vars_[i]; }
  const ParamSet& params() const noexcept { return *params_; }
  Tape& tape() const noexcept { return *tape_; }

  // Gradients aligned with ParamSet order (after Tape::backward).
  std::vector<Tensor> gradients() const;

 private:
  Tape* tape_;
  const ParamSet* params_;
  std::vector<Var> vars_;
};

}  // namespace ctsm
