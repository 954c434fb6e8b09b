#include "ctsm/task.hpp"

#include <fmt/format.h>

#include "ctsm/error.hpp"

namespace ctsm {

TaskSpec TaskSpec::multiclass(std::size_t k) {
  TaskSpec t{TaskKind::multiclass, k};
  t.validate();
  return t;
}

Activation TaskSpec::head_activation() const noexcept {
  switch (kind) {
    case TaskKind::regression: return Activation::none;
    case TaskKind::binary: return Activation::sigmoid;
    case TaskKind::multiclass: return Activation::softmax;
  }
  return Activation::none;
}

LossKind TaskSpec::loss() const noexcept {
  switch (kind) {
    case TaskKind::regression: return LossKind::mse;
    case TaskKind::binary: return LossKind::bce;
    case TaskKind::multiclass: return LossKind::ce;
  }
  return LossKind::mse;
}

void TaskSpec::validate() const {
  if (kind == TaskKind::multiclass && classes < 2) {
    throw ConfigError(fmt::format("multiclass task needs at least 2 classes, got {}", classes));
  }
}

std::string TaskSpec::name() const {
  switch (kind) {
    case TaskKind::regression: return "regression";
    case TaskKind::binary: return "binary";
    case TaskKind::multiclass: return "multiclass";
  }
  return "?";
}

TaskSpec task_from_string(std::string_view name, std::size_t classes) {
  if (name == "regression") return TaskSpec::regression();
  if (name == "binary") return TaskSpec::binary();
  if (name == "multiclass") return TaskSpec::multiclass(classes);
  throw ConfigError(fmt::format("unknown task '{}' (regression|binary|multiclass)", name));
}

}  // namespace ctsm
