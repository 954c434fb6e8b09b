#include "ctsm/tensor/params.hpp"

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

std::string_view to_string(ParamGroup group) {
  switch (group) {
    case ParamGroup::embedding: return "embedding";
    case ParamGroup::dynamics: return "dynamics";
    case ParamGroup::head: return "head";
  }
  return "unknown";
}

ParamGroup param_group_from_string(std::string_view name) {
  if (name == "embedding") return ParamGroup::embedding;
  if (name == "dynamics") return ParamGroup::dynamics;
  if (name == "head") return ParamGroup::head;
  throw ConfigError(fmt::format("unknown parameter group '{}'", name));
}

void ParamSet::add(std::string name, ParamGroup group, Tensor value) {
  if (by_name_.contains(name)) throw ConfigError(fmt::format("duplicate parameter '{}'", name));
  by_name_.emplace(name, entries_.size());
  entries_.push_back(Parameter{std::move(name), group, std::move(value)});
}

bool ParamSet::contains(std::string_view name) const { return find(name).has_value(); }

std::optional<std::size_t> ParamSet::find(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t ParamSet::index(std::string_view name) const {
  const auto i = find(name);
  if (!i) throw ConfigError(fmt::format("no parameter named '{}'", name));
  return *i;
}

std::size_t ParamSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : entries_) n += p.value.size();
  return n;
}

ParamBinding::ParamBinding(Tape& tape, const ParamSet& params, bool requires_grad)
    : tape_(&tape), params_(&params) {
  vars_.reserve(params.size());
  for (const auto& p : params.entries()) vars_.push_back(tape.leaf(p.value, requires_grad));
}

const Var& ParamBinding::operator[](std::string_view name) const { return vars_[params_->index(name)]; }

std::vector<Tensor> ParamBinding::gradients() const {
  std::vector<Tensor> grads;
  grads.reserve(vars_.size());
  for (const Var& v : vars_) grads.push_back(tape_->grad(v));
  return grads;
}

}  // namespace ctsm
