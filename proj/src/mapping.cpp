#include "taskmap/mapping.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace taskmap {

namespace {

uint64_t checked_mul(uint64_t a, uint64_t b, const char* what) {
  uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) fail("overflow computing ", what, ": ", a, " * ", b);
  return r;
}

}  // namespace

TaskShape::TaskShape(std::vector<uint64_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) fail("task shape must have at least one dimension");
  for (uint64_t d : dims_) {
    if (d == 0) fail("task shape extents must be positive");
    total_ = checked_mul(total_, d, "task shape volume");
  }
}

TaskShape TaskShape::elementwise_mul(const TaskShape& other) const {
  if (rank() != other.rank())
    fail("elementwise product needs equal ranks, got ", rank(), " and ", other.rank());
  std::vector<uint64_t> out(rank());
  for (size_t i = 0; i < rank(); ++i) out[i] = checked_mul(dims_[i], other.dims_[i], "task shape");
  return TaskShape(out);
}

struct TaskMapping::Node {
  Kind kind;
  TaskShape shape;
  uint64_t num_workers = 1;
  uint64_t tasks_per_worker = 1;
  // Compose
  std::shared_ptr<const Node> lhs, rhs;
  // Custom
  std::vector<std::vector<Task>> table;
};

TaskMapping TaskMapping::repeat(TaskShape shape) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Repeat;
  n->num_workers = 1;
  n->tasks_per_worker = shape.total();
  n->shape = std::move(shape);
  return TaskMapping(std::move(n));
}

TaskMapping TaskMapping::spatial(TaskShape shape) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Spatial;
  n->num_workers = shape.total();
  n->tasks_per_worker = 1;
  n->shape = std::move(shape);
  return TaskMapping(std::move(n));
}

TaskMapping TaskMapping::custom(uint64_t num_workers, TaskShape shape,
                                std::vector<std::vector<Task>> table) {
  if (num_workers == 0) fail("custom mapping needs at least one worker");
  if (table.size() != num_workers)
    fail("custom mapping table must list every worker: got ", table.size(), " lists for ",
         num_workers, " workers");
  for (const auto& tasks : table) {
    for (const Task& t : tasks) {
      if (t.size() != shape.rank())
        fail("custom task rank ", t.size(), " does not match shape rank ", shape.rank());
      for (size_t i = 0; i < t.size(); ++i)
        if (t[i] >= shape[i]) fail("custom task coordinate ", t[i], " outside extent ", shape[i]);
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Custom;
  n->num_workers = num_workers;
  n->tasks_per_worker = table.empty() ? 0 : table[0].size();
  n->shape = std::move(shape);
  n->table = std::move(table);
  return TaskMapping(std::move(n));
}

TaskMapping TaskMapping::compose(const TaskMapping& f1, const TaskMapping& f2) {
  if (f1.task_dim() != f2.task_dim())
    fail("cannot compose mappings with task dimensions ", f1.task_dim(), " and ", f2.task_dim());
  auto n = std::make_shared<Node>();
  n->kind = Kind::Compose;
  n->num_workers = checked_mul(f1.num_workers(), f2.num_workers(), "composed worker count");
  n->shape = f1.task_shape().elementwise_mul(f2.task_shape());
  n->lhs = f1.node_;
  n->rhs = f2.node_;
  n->tasks_per_worker =
      checked_mul(f1.node_->tasks_per_worker, f2.node_->tasks_per_worker, "tasks per worker");
  return TaskMapping(std::move(n));
}

TaskMapping::Kind TaskMapping::kind() const { return node_->kind; }
uint64_t TaskMapping::num_workers() const { return node_->num_workers; }
const TaskShape& TaskMapping::task_shape() const { return node_->shape; }

TaskMapping TaskMapping::lhs() const {
  if (node_->kind != Kind::Compose) fail("lhs() requires a composed mapping");
  return TaskMapping(node_->lhs);
}

TaskMapping TaskMapping::rhs() const {
  if (node_->kind != Kind::Compose) fail("rhs() requires a composed mapping");
  return TaskMapping(node_->rhs);
}

const std::vector<std::vector<Task>>& TaskMapping::table() const {
  if (node_->kind != Kind::Custom) fail("table() requires a custom mapping");
  return node_->table;
}

uint64_t TaskMapping::tasks_per_worker() const {
  if (node_->kind == Kind::Custom) {
    for (const auto& tasks : node_->table)
      if (tasks.size() != node_->tasks_per_worker)
        fail("custom mapping has non-uniform per-worker task counts");
  }
  return node_->tasks_per_worker;
}

namespace {

// Row-major enumeration of a task domain.
void enumerate_domain(const TaskShape& shape, std::vector<Task>& out) {
  Task t(shape.rank(), 0);
  for (uint64_t flat = 0; flat < shape.total(); ++flat) {
    uint64_t rem = flat;
    for (size_t i = shape.rank(); i-- > 0;) {
      t[i] = rem % shape[i];
      rem /= shape[i];
    }
    out.push_back(t);
  }
}

Task unlinearize(uint64_t flat, const TaskShape& shape) {
  Task t(shape.rank(), 0);
  for (size_t i = shape.rank(); i-- > 0;) {
    t[i] = flat % shape[i];
    flat /= shape[i];
  }
  return t;
}

}  // namespace

std::vector<Task> TaskMapping::assign(uint64_t worker) const {
  if (worker >= node_->num_workers)
    fail("worker id ", worker, " out of range for ", node_->num_workers, " workers");
  switch (node_->kind) {
    case Kind::Repeat: {
      std::vector<Task> out;
      out.reserve(node_->shape.total());
      enumerate_domain(node_->shape, out);
      return out;
    }
    case Kind::Spatial:
      return {unlinearize(worker, node_->shape)};
    case Kind::Custom:
      return node_->table[worker];
    case Kind::Compose: {
      TaskMapping f1(node_->lhs), f2(node_->rhs);
      uint64_t n2 = f2.num_workers();
      std::vector<Task> t1s = f1.assign(worker / n2);
      std::vector<Task> t2s = f2.assign(worker % n2);
      const TaskShape& d2 = f2.task_shape();
      std::vector<Task> out;
      out.reserve(t1s.size() * t2s.size());
      for (const Task& t1 : t1s) {
        for (const Task& t2 : t2s) {
          Task t(t1.size());
          for (size_t i = 0; i < t.size(); ++i) t[i] = t1[i] * d2[i] + t2[i];
          out.push_back(std::move(t));
        }
      }
      return out;
    }
  }
  fail("unreachable mapping kind");
}

std::string TaskMapping::to_text() const {
  std::ostringstream os;
  switch (node_->kind) {
    case Kind::Repeat:
    case Kind::Spatial: {
      os << (node_->kind == Kind::Repeat ? "repeat(" : "spatial(");
      for (size_t i = 0; i < node_->shape.rank(); ++i) {
        if (i) os << ", ";
        os << node_->shape[i];
      }
      os << ")";
      return os.str();
    }
    case Kind::Custom: {
      os << "custom(workers=" << node_->num_workers << ", shape=(";
      for (size_t i = 0; i < node_->shape.rank(); ++i) {
        if (i) os << ", ";
        os << node_->shape[i];
      }
      os << "), table=[";
      for (size_t w = 0; w < node_->table.size(); ++w) {
        if (w) os << ", ";
        os << "[";
        for (size_t j = 0; j < node_->table[w].size(); ++j) {
          if (j) os << ", ";
          os << "(";
          for (size_t i = 0; i < node_->table[w][j].size(); ++i) {
            if (i) os << ", ";
            os << node_->table[w][j][i];
          }
          os << ")";
        }
        os << "]";
      }
      os << "])";
      return os.str();
    }
    case Kind::Compose:
      return TaskMapping(node_->lhs).to_text() + " * " + TaskMapping(node_->rhs).to_text();
  }
  fail("unreachable mapping kind");
}

std::string TaskMapping::visualize() const {
  if (task_dim() > 2) fail("visualize supports task dimension <= 2, got ", task_dim());
  uint64_t rows = task_dim() == 2 ? node_->shape[0] : 1;
  uint64_t cols = task_dim() == 2 ? node_->shape[1] : node_->shape[0];
  std::vector<std::vector<std::string>> cells(rows, std::vector<std::string>(cols));
  for (uint64_t w = 0; w < num_workers(); ++w) {
    std::vector<Task> tasks = assign(w);
    for (size_t order = 0; order < tasks.size(); ++order) {
      const Task& t = tasks[order];
      uint64_t r = task_dim() == 2 ? t[0] : 0;
      uint64_t c = task_dim() == 2 ? t[1] : t[0];
      std::string label = "w" + std::to_string(w) + ":" + std::to_string(order);
      std::string& cell = cells[r][c];
      cell = cell.empty() ? label : cell + "," + label;
    }
  }
  size_t width = 1;
  for (auto& row : cells)
    for (auto& cell : row) {
      if (cell.empty()) cell = "-";
      width = std::max(width, cell.size());
    }
  std::ostringstream os;
  for (uint64_t r = 0; r < rows; ++r) {
    for (uint64_t c = 0; c < cols; ++c) {
      if (c) os << " ";
      os << cells[r][c];
      if (c + 1 < cols) os << std::string(width - cells[r][c].size(), ' ');
    }
    os << "\n";
  }
  return os.str();
}

bool TaskMapping::operator==(const TaskMapping& other) const {
  if (node_ == other.node_) return true;
  if (node_->kind != other.node_->kind) return false;
  if (!(node_->shape == other.node_->shape)) return false;
  if (node_->num_workers != other.node_->num_workers) return false;
  switch (node_->kind) {
    case Kind::Repeat:
    case Kind::Spatial:
      return true;
    case Kind::Custom:
      return node_->table == other.node_->table;
    case Kind::Compose:
      return TaskMapping(node_->lhs) == TaskMapping(other.node_->lhs) &&
             TaskMapping(node_->rhs) == TaskMapping(other.node_->rhs);
  }
  return false;
}

TaskMapping operator*(const TaskMapping& a, const TaskMapping& b) {
  return TaskMapping::compose(a, b);
}

// ---------------------------------------------------------------------------
// Text parser for the canonical mapping form.

namespace {

struct MappingParser {
  const std::string& text;
  size_t pos = 0;

  explicit MappingParser(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail("mapping parse error at offset ", pos, ": expected '", c, "'");
  }

  bool eat_word(const char* w) {
    skip_ws();
    size_t len = std::string(w).size();
    if (text.compare(pos, len, w) == 0) {
      pos += len;
      return true;
    }
    return false;
  }

  uint64_t parse_int() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos) fail("mapping parse error at offset ", pos, ": expected integer");
    return std::stoull(text.substr(start, pos - start));
  }

  std::vector<uint64_t> parse_int_list_paren() {
    expect('(');
    std::vector<uint64_t> out;
    out.push_back(parse_int());
    while (eat(',')) out.push_back(parse_int());
    expect(')');
    return out;
  }

  TaskMapping parse_atom() {
    skip_ws();
    if (eat_word("repeat")) return TaskMapping::repeat(TaskShape(parse_int_list_paren()));
    if (eat_word("spatial")) return TaskMapping::spatial(TaskShape(parse_int_list_paren()));
    if (eat_word("custom")) {
      expect('(');
      if (!eat_word("workers")) fail("custom mapping: expected workers=");
      expect('=');
      uint64_t workers = parse_int();
      expect(',');
      if (!eat_word("shape")) fail("custom mapping: expected shape=");
      expect('=');
      TaskShape shape{TaskShape(parse_int_list_paren())};
      expect(',');
      if (!eat_word("table")) fail("custom mapping: expected table=");
      expect('=');
      expect('[');
      std::vector<std::vector<Task>> table;
      if (!eat(']')) {
        do {
          expect('[');
          std::vector<Task> tasks;
          if (!eat(']')) {
            do {
              tasks.push_back(Task{parse_int_list_paren()});
            } while (eat(','));
            expect(']');
          }
          table.push_back(std::move(tasks));
        } while (eat(','));
        expect(']');
      }
      expect(')');
      return TaskMapping::custom(workers, shape, std::move(table));
    }
    if (eat('(')) {
      TaskMapping inner = parse_compose();
      expect(')');
      return inner;
    }
    fail("mapping parse error at offset ", pos, ": expected repeat/spatial/custom");
  }

  TaskMapping parse_compose() {
    TaskMapping m = parse_atom();
    while (eat('*')) m = m * parse_atom();
    return m;
  }
};

}  // namespace

TaskMapping parse_mapping(const std::string& text) {
  MappingParser p(text);
  TaskMapping m = p.parse_compose();
  p.skip_ws();
  if (p.pos != text.size()) fail("mapping parse error: trailing input at offset ", p.pos);
  return m;
}

}  // namespace taskmap
