#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "taskmap/common.hpp"

namespace taskmap {

// A task coordinate inside the task domain.
using Task = std::vector<uint64_t>;

// Shape of a task domain: positive extents (d_0, ..., d_{m-1}).
class TaskShape {
 public:
  TaskShape() = default;
  TaskShape(std::initializer_list<uint64_t> dims) : TaskShape(std::vector<uint64_t>(dims)) {}
  explicit TaskShape(std::vector<uint64_t> dims);

  const std::vector<uint64_t>& dims() const { return dims_; }
  size_t rank() const { return dims_.size(); }
  uint64_t operator[](size_t i) const { return dims_[i]; }
  uint64_t total() const { return total_; }

  // Elementwise product; ranks must match.
  TaskShape elementwise_mul(const TaskShape& other) const;

  bool operator==(const TaskShape& other) const { return dims_ == other.dims_; }

 private:
  std::vector<uint64_t> dims_;
  uint64_t total_ = 1;
};

// Immutable task mapping: assigns each worker in {0..n-1} an ordered list of
// tasks inside the task domain. Values are cheap to copy and safe to share.
class TaskMapping {
 public:
  enum class Kind { Repeat, Spatial, Custom, Compose };

  // All tasks of the domain executed in row-major order by a single worker.
  static TaskMapping repeat(TaskShape shape);
  // One task per worker, row-major linearization of the domain.
  static TaskMapping spatial(TaskShape shape);
  // Explicit worker -> task-list table. Validated against the domain.
  static TaskMapping custom(uint64_t num_workers, TaskShape shape,
                            std::vector<std::vector<Task>> table);
  static TaskMapping compose(const TaskMapping& f1, const TaskMapping& f2);

  Kind kind() const;
  uint64_t num_workers() const;
  const TaskShape& task_shape() const;
  size_t task_dim() const { return task_shape().rank(); }

  // Ordered task list of one worker; worker must be in range.
  std::vector<Task> assign(uint64_t worker) const;

  // Number of tasks each worker receives. Repeat/Spatial/Compose mappings are
  // uniform by construction; Custom mappings throw when lists differ in length.
  uint64_t tasks_per_worker() const;

  // Compose children (Kind::Compose only).
  TaskMapping lhs() const;
  TaskMapping rhs() const;
  // Custom table (Kind::Custom only).
  const std::vector<std::vector<Task>>& table() const;

  // Canonical text form, e.g. "repeat(4, 1) * spatial(16, 8)".
  std::string to_text() const;

  // Fig. 7/8-style grid for task dimension <= 2. Cell format "w{id}:{order}".
  std::string visualize() const;

  bool operator==(const TaskMapping& other) const;

 private:
  struct Node;
  explicit TaskMapping(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Left-associative composition operator: a * b == compose(a, b).
TaskMapping operator*(const TaskMapping& a, const TaskMapping& b);

// Parses the canonical text form, including compositions with '*' and custom
// mappings written as custom(workers=N, shape=(d0, ...), table=[[(...), ...], ...]).
TaskMapping parse_mapping(const std::string& text);

}  // namespace taskmap
