#include "taskmap/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace taskmap {

namespace {

Expr make(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

}  // namespace

Expr imm(int64_t v) {
  ExprNode n;
  n.kind = ExprKind::IntImm;
  n.ival = v;
  return make(std::move(n));
}

Expr fimm(double v) {
  ExprNode n;
  n.kind = ExprKind::FloatImm;
  n.fval = v;
  return make(std::move(n));
}

Expr var(const std::string& name) {
  ExprNode n;
  n.kind = ExprKind::Var;
  n.name = name;
  return make(std::move(n));
}

Expr thread_idx() {
  ExprNode n;
  n.kind = ExprKind::ThreadIdx;
  return make(std::move(n));
}

Expr block_idx() {
  ExprNode n;
  n.kind = ExprKind::BlockIdx;
  return make(std::move(n));
}

Expr binary(BinOp op, Expr a, Expr b) {
  if ((op == BinOp::Div || op == BinOp::Mod) && b->is_const_int(0))
    fail("division/modulo by zero constant");
  ExprNode n;
  n.kind = ExprKind::Binary;
  n.bop = op;
  n.args = {std::move(a), std::move(b)};
  return make(std::move(n));
}

Expr unary(UnOp op, Expr a) {
  ExprNode n;
  n.kind = ExprKind::Unary;
  n.uop = op;
  n.args = {std::move(a)};
  return make(std::move(n));
}

Expr select(Expr cond, Expr then_val, Expr else_val) {
  ExprNode n;
  n.kind = ExprKind::Select;
  n.args = {std::move(cond), std::move(then_val), std::move(else_val)};
  return make(std::move(n));
}

Expr load(const std::string& buffer, std::vector<Expr> indices) {
  ExprNode n;
  n.kind = ExprKind::Load;
  n.name = buffer;
  n.args = std::move(indices);
  return make(std::move(n));
}

Expr table_lookup(IndexTable table, Expr index) {
  if (!table || table->empty()) fail("table lookup needs a non-empty table");
  ExprNode n;
  n.kind = ExprKind::TableLookup;
  n.table = std::move(table);
  n.args = {std::move(index)};
  return make(std::move(n));
}

namespace {

Expr map_children(const Expr& e, const std::function<Expr(const Expr&)>& fn) {
  if (e->args.empty()) return e;
  bool changed = false;
  std::vector<Expr> args;
  args.reserve(e->args.size());
  for (const Expr& a : e->args) {
    Expr na = fn(a);
    changed |= (na != a);
    args.push_back(std::move(na));
  }
  if (!changed) return e;
  ExprNode n = *e;
  n.args = std::move(args);
  return std::make_shared<const ExprNode>(std::move(n));
}

}  // namespace

Expr substitute(const Expr& e, const std::map<std::string, Expr>& vars) {
  if (e->kind == ExprKind::Var) {
    auto it = vars.find(e->name);
    return it == vars.end() ? e : it->second;
  }
  return map_children(e, [&](const Expr& a) { return substitute(a, vars); });
}

Expr rewrite_loads(const Expr& e, const std::function<std::optional<Expr>(const ExprNode&)>& fn) {
  Expr mapped = map_children(e, [&](const Expr& a) { return rewrite_loads(a, fn); });
  if (mapped->kind == ExprKind::Load) {
    if (auto r = fn(*mapped)) return *r;
  }
  return mapped;
}

namespace {

bool pure_scalar(const Expr& e) {
  if (e->kind == ExprKind::Load || e->kind == ExprKind::TableLookup) return false;
  for (const Expr& a : e->args)
    if (!pure_scalar(a)) return false;
  return true;
}

int64_t fold_int_binop(BinOp op, int64_t a, int64_t b) {
  switch (op) {
    case BinOp::Add: return a + b;
    case BinOp::Sub: return a - b;
    case BinOp::Mul: return a * b;
    case BinOp::Div: return floordiv(a, b);
    case BinOp::Mod: return floormod(a, b);
    case BinOp::Min: return std::min(a, b);
    case BinOp::Max: return std::max(a, b);
    case BinOp::And: return (a != 0 && b != 0) ? 1 : 0;
    case BinOp::Or: return (a != 0 || b != 0) ? 1 : 0;
    case BinOp::Lt: return a < b;
    case BinOp::Le: return a <= b;
    case BinOp::Gt: return a > b;
    case BinOp::Ge: return a >= b;
    case BinOp::Eq: return a == b;
    case BinOp::Ne: return a != b;
  }
  fail("unreachable binop");
}

double fold_float_binop(BinOp op, double a, double b) {
  switch (op) {
    case BinOp::Add: return a + b;
    case BinOp::Sub: return a - b;
    case BinOp::Mul: return a * b;
    case BinOp::Div: return a / b;
    case BinOp::Min: return std::min(a, b);
    case BinOp::Max: return std::max(a, b);
    default: fail("binop ", binop_name(op), " not foldable on floats here");
  }
}

bool is_cmp(BinOp op) {
  return op == BinOp::Lt || op == BinOp::Le || op == BinOp::Gt || op == BinOp::Ge ||
         op == BinOp::Eq || op == BinOp::Ne;
}

}  // namespace

Expr fold(const Expr& e) {
  Expr m = map_children(e, [](const Expr& a) { return fold(a); });
  switch (m->kind) {
    case ExprKind::Binary: {
      const Expr& a = m->args[0];
      const Expr& b = m->args[1];
      if (a->kind == ExprKind::IntImm && b->kind == ExprKind::IntImm)
        return imm(fold_int_binop(m->bop, a->ival, b->ival));
      if (a->kind == ExprKind::FloatImm && b->kind == ExprKind::FloatImm && !is_cmp(m->bop) &&
          m->bop != BinOp::And && m->bop != BinOp::Or && m->bop != BinOp::Mod)
        return fimm(fold_float_binop(m->bop, a->fval, b->fval));
      // Mixed int/float constants in arithmetic: promote the int.
      if (a->kind == ExprKind::IntImm && b->kind == ExprKind::FloatImm && !is_cmp(m->bop) &&
          m->bop != BinOp::And && m->bop != BinOp::Or && m->bop != BinOp::Mod &&
          m->bop != BinOp::Div)
        return fimm(fold_float_binop(m->bop, static_cast<double>(a->ival), b->fval));
      if (a->kind == ExprKind::FloatImm && b->kind == ExprKind::IntImm && !is_cmp(m->bop) &&
          m->bop != BinOp::And && m->bop != BinOp::Or && m->bop != BinOp::Mod &&
          m->bop != BinOp::Div)
        return fimm(fold_float_binop(m->bop, a->fval, static_cast<double>(b->ival)));
      switch (m->bop) {
        case BinOp::Add:
          if (a->is_const_int(0)) return b;
          if (b->is_const_int(0)) return a;
          break;
        case BinOp::Sub:
          if (b->is_const_int(0)) return a;
          break;
        case BinOp::Mul:
          if (a->is_const_int(1)) return b;
          if (b->is_const_int(1)) return a;
          if ((a->is_const_int(0) && pure_scalar(b)) || (b->is_const_int(0) && pure_scalar(a)))
            return imm(0);
          break;
        case BinOp::Div:
          if (b->is_const_int(1)) return a;
          break;
        case BinOp::Mod:
          if (b->is_const_int(1) && pure_scalar(a)) return imm(0);
          break;
        case BinOp::And:
          if (a->is_const_int(1)) return b;
          if (b->is_const_int(1)) return a;
          break;
        default:
          break;
      }
      return m;
    }
    case ExprKind::Unary: {
      const Expr& a = m->args[0];
      if (a->kind == ExprKind::IntImm) {
        switch (m->uop) {
          case UnOp::Neg: return imm(-a->ival);
          case UnOp::Relu: return imm(std::max<int64_t>(a->ival, 0));
          case UnOp::CastI32: return a;
          case UnOp::CastF32: return fimm(static_cast<double>(a->ival));
          default: break;
        }
      }
      if (a->kind == ExprKind::FloatImm) {
        switch (m->uop) {
          case UnOp::Neg: return fimm(-a->fval);
          case UnOp::Relu: return fimm(std::max(a->fval, 0.0));
          case UnOp::Exp: return fimm(std::exp(a->fval));
          case UnOp::Sqrt: return fimm(std::sqrt(a->fval));
          case UnOp::CastF32: return a;
          case UnOp::CastI32: return imm(static_cast<int64_t>(a->fval));
        }
      }
      return m;
    }
    case ExprKind::Select: {
      const Expr& c = m->args[0];
      if (c->kind == ExprKind::IntImm) return c->ival != 0 ? m->args[1] : m->args[2];
      return m;
    }
    case ExprKind::TableLookup: {
      const Expr& idx = m->args[0];
      if (idx->kind == ExprKind::IntImm) {
        if (idx->ival < 0 || static_cast<size_t>(idx->ival) >= m->table->size())
          fail("constant table lookup out of range: ", idx->ival);
        return imm((*m->table)[idx->ival]);
      }
      return m;
    }
    default:
      return m;
  }
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::IntImm: return a->ival == b->ival;
    case ExprKind::FloatImm: return a->fval == b->fval;
    case ExprKind::Var: return a->name == b->name;
    case ExprKind::ThreadIdx:
    case ExprKind::BlockIdx: return true;
    case ExprKind::Binary:
      if (a->bop != b->bop) return false;
      break;
    case ExprKind::Unary:
      if (a->uop != b->uop) return false;
      break;
    case ExprKind::Select: break;
    case ExprKind::Load:
      if (a->name != b->name) return false;
      break;
    case ExprKind::TableLookup:
      if (a->table != b->table && *a->table != *b->table) return false;
      break;
  }
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!expr_equal(a->args[i], b->args[i])) return false;
  return true;
}

bool uses_thread_idx(const Expr& e) {
  if (e->kind == ExprKind::ThreadIdx) return true;
  for (const Expr& a : e->args)
    if (uses_thread_idx(a)) return true;
  return false;
}

void collect_vars(const Expr& e, std::vector<std::string>& out) {
  if (e->kind == ExprKind::Var) out.push_back(e->name);
  for (const Expr& a : e->args) collect_vars(a, out);
}

void collect_loads(const Expr& e, std::vector<Expr>& out) {
  if (e->kind == ExprKind::Load) out.push_back(e);
  for (const Expr& a : e->args) collect_loads(a, out);
}

const char* binop_name(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Min: return "min";
    case BinOp::Max: return "max";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
  }
  return "?";
}

const char* unop_name(UnOp op) {
  switch (op) {
    case UnOp::Neg: return "-";
    case UnOp::Relu: return "relu";
    case UnOp::Exp: return "exp";
    case UnOp::Sqrt: return "sqrt";
    case UnOp::CastF32: return "f32";
    case UnOp::CastI32: return "i32";
  }
  return "?";
}

namespace {

// Precedence for the canonical printer/parser. Higher binds tighter.
int precedence(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 3;
    case BinOp::Add:
    case BinOp::Sub: return 4;
    case BinOp::Mul:
    case BinOp::Div:
    case BinOp::Mod: return 5;
    case BinOp::Min:
    case BinOp::Max: return 9;  // function syntax
  }
  return 9;
}

std::string float_text(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

void print_expr(std::ostringstream& os, const Expr& e, int parent_prec) {
  switch (e->kind) {
    case ExprKind::IntImm:
      if (e->ival < 0) {
        os << "(" << e->ival << ")";
      } else {
        os << e->ival;
      }
      return;
    case ExprKind::FloatImm: {
      std::string s = float_text(e->fval);
      if (!s.empty() && s[0] == '-') {
        os << "(" << s << ")";
      } else {
        os << s;
      }
      return;
    }
    case ExprKind::Var: os << e->name; return;
    case ExprKind::ThreadIdx: os << "threadIdx"; return;
    case ExprKind::BlockIdx: os << "blockIdx"; return;
    case ExprKind::Binary: {
      if (e->bop == BinOp::Min || e->bop == BinOp::Max) {
        os << (e->bop == BinOp::Min ? "min(" : "max(");
        print_expr(os, e->args[0], 0);
        os << ", ";
        print_expr(os, e->args[1], 0);
        os << ")";
        return;
      }
      int prec = precedence(e->bop);
      if (prec < parent_prec) os << "(";
      print_expr(os, e->args[0], prec);
      os << " " << binop_name(e->bop) << " ";
      print_expr(os, e->args[1], prec + 1);  // left-associative
      if (prec < parent_prec) os << ")";
      return;
    }
    case ExprKind::Unary: {
      if (e->uop == UnOp::Neg) {
        os << "-";
        print_expr(os, e->args[0], 8);
        return;
      }
      os << unop_name(e->uop) << "(";
      print_expr(os, e->args[0], 0);
      os << ")";
      return;
    }
    case ExprKind::Select: {
      os << "select(";
      print_expr(os, e->args[0], 0);
      os << ", ";
      print_expr(os, e->args[1], 0);
      os << ", ";
      print_expr(os, e->args[2], 0);
      os << ")";
      return;
    }
    case ExprKind::Load: {
      os << e->name << "[";
      for (size_t i = 0; i < e->args.size(); ++i) {
        if (i) os << ", ";
        print_expr(os, e->args[i], 0);
      }
      os << "]";
      return;
    }
    case ExprKind::TableLookup: {
      os << "lookup([";
      for (size_t i = 0; i < e->table->size(); ++i) {
        if (i) os << ", ";
        os << (*e->table)[i];
      }
      os << "], ";
      print_expr(os, e->args[0], 0);
      os << ")";
      return;
    }
  }
}

}  // namespace

std::string expr_to_text(const Expr& e) {
  std::ostringstream os;
  print_expr(os, e, 0);
  return os.str();
}

}  // namespace taskmap
