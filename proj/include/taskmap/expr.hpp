#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "taskmap/common.hpp"

namespace taskmap {

enum class BinOp { Add, Sub, Mul, Div, Mod, Min, Max, And, Or, Lt, Le, Gt, Ge, Eq, Ne };
enum class UnOp { Neg, Relu, Exp, Sqrt, CastF32, CastI32 };

enum class ExprKind { IntImm, FloatImm, Var, ThreadIdx, BlockIdx, Binary, Unary, Select, Load, TableLookup };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;
using IndexTable = std::shared_ptr<const std::vector<int64_t>>;

// Immutable scalar expression tree shared by the compute definitions and the
// scheduled program IR. Load reads a tensor/buffer by name; inside compute
// definitions the name refers to a DAG node, inside kernels to a Buffer.
struct ExprNode {
  ExprKind kind;
  int64_t ival = 0;       // IntImm
  double fval = 0.0;      // FloatImm
  std::string name;       // Var / Load buffer name
  BinOp bop = BinOp::Add;
  UnOp uop = UnOp::Neg;
  std::vector<Expr> args;  // Binary: 2; Unary: 1; Select: cond,then,else; Load: indices; TableLookup: 1
  IndexTable table;        // TableLookup

  bool is_const_int(int64_t v) const { return kind == ExprKind::IntImm && ival == v; }
};

Expr imm(int64_t v);
Expr fimm(double v);
Expr var(const std::string& name);
Expr thread_idx();
Expr block_idx();
Expr binary(BinOp op, Expr a, Expr b);
Expr unary(UnOp op, Expr a);
Expr select(Expr cond, Expr then_val, Expr else_val);
Expr load(const std::string& buffer, std::vector<Expr> indices);
Expr table_lookup(IndexTable table, Expr index);

inline Expr add(Expr a, Expr b) { return binary(BinOp::Add, std::move(a), std::move(b)); }
inline Expr sub(Expr a, Expr b) { return binary(BinOp::Sub, std::move(a), std::move(b)); }
inline Expr mul(Expr a, Expr b) { return binary(BinOp::Mul, std::move(a), std::move(b)); }
inline Expr div(Expr a, Expr b) { return binary(BinOp::Div, std::move(a), std::move(b)); }
inline Expr mod(Expr a, Expr b) { return binary(BinOp::Mod, std::move(a), std::move(b)); }
inline Expr min(Expr a, Expr b) { return binary(BinOp::Min, std::move(a), std::move(b)); }
inline Expr max(Expr a, Expr b) { return binary(BinOp::Max, std::move(a), std::move(b)); }
inline Expr land(Expr a, Expr b) { return binary(BinOp::And, std::move(a), std::move(b)); }
inline Expr lor(Expr a, Expr b) { return binary(BinOp::Or, std::move(a), std::move(b)); }
inline Expr lt(Expr a, Expr b) { return binary(BinOp::Lt, std::move(a), std::move(b)); }
inline Expr le(Expr a, Expr b) { return binary(BinOp::Le, std::move(a), std::move(b)); }
inline Expr gt(Expr a, Expr b) { return binary(BinOp::Gt, std::move(a), std::move(b)); }
inline Expr ge(Expr a, Expr b) { return binary(BinOp::Ge, std::move(a), std::move(b)); }
inline Expr eq(Expr a, Expr b) { return binary(BinOp::Eq, std::move(a), std::move(b)); }
inline Expr ne(Expr a, Expr b) { return binary(BinOp::Ne, std::move(a), std::move(b)); }
inline Expr neg(Expr a) { return unary(UnOp::Neg, std::move(a)); }
inline Expr relu(Expr a) { return unary(UnOp::Relu, std::move(a)); }

// Zero constant matching the element type.
inline Expr zero_of(DType t) { return t == DType::F32 ? fimm(0.0) : imm(0); }

// Replaces free variables by expressions.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& vars);

// Rewrites Load nodes; the callback returns the replacement or nullopt to keep.
Expr rewrite_loads(const Expr& e, const std::function<std::optional<Expr>(const ExprNode&)>& fn);

// Constant folding plus safe algebraic identities (x+0, x*1, x/1, ...).
// Identities are applied only when the dropped operand is a pure scalar.
Expr fold(const Expr& e);

bool expr_equal(const Expr& a, const Expr& b);

// True when the expression reads threadIdx (directly).
bool uses_thread_idx(const Expr& e);

void collect_vars(const Expr& e, std::vector<std::string>& out);
void collect_loads(const Expr& e, std::vector<Expr>& out);

// Canonical text used by the kernel printer and error messages.
std::string expr_to_text(const Expr& e);

const char* binop_name(BinOp op);  // symbolic ("+", "min", ...)
const char* unop_name(UnOp op);

}  // namespace taskmap
