#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "ctsm/tensor/loss.hpp"
#include "ctsm/tensor/ops.hpp"

namespace ctsm {

enum class TaskKind { regression, binary, multiclass };

struct TaskSpec {
  TaskKind kind = TaskKind::binary;
  std::size_t classes = 2;  // used by multiclass only

  static TaskSpec regression() { return {TaskKind::regression, 1}; }
  static TaskSpec binary() { return {TaskKind::binary, 2}; }
  static TaskSpec multiclass(std::size_t k);

  // Width of the prediction head.
  std::size_t output_width() const noexcept { return kind == TaskKind::multiclass ? classes : 1; }
  Activation head_activation() const noexcept;
  LossKind loss() const noexcept;
  void validate() const;
  std::string name() const;
};

TaskSpec task_from_string(std::string_view name, std::size_t classes = 4);

}  // namespace ctsm
