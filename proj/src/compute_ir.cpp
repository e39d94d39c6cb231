#include "taskmap/compute_ir.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

namespace taskmap {

const char* combiner_name(Combiner c) {
  switch (c) {
    case Combiner::Sum: return "sum";
    case Combiner::Max: return "max";
    case Combiner::Min: return "min";
  }
  return "?";
}

Combiner combiner_from_name(const std::string& s) {
  if (s == "sum") return Combiner::Sum;
  if (s == "max") return Combiner::Max;
  if (s == "min") return Combiner::Min;
  fail("unknown combiner: ", s);
}

const char* opclass_name(OpClass c) {
  switch (c) {
    case OpClass::Reduction: return "reduction";
    case OpClass::Injective: return "injective";
    case OpClass::Bijective: return "bijective";
  }
  return "?";
}

const TensorNode* ComputeDAG::find(const std::string& name) const {
  for (const TensorNode& n : nodes)
    if (n.name == name) return &n;
  return nullptr;
}

const TensorNode& ComputeDAG::at(const std::string& name) const {
  const TensorNode* n = find(name);
  if (!n) fail("no tensor named '", name, "' in DAG");
  return *n;
}

void ComputeDAG::validate() const {
  std::set<std::string> seen;
  for (const TensorNode& n : nodes) {
    if (n.name.empty()) fail("tensor node with empty name");
    if (!seen.insert(n.name).second) fail("duplicate tensor name '", n.name, "'");
    if (n.shape.empty()) fail("tensor '", n.name, "' has empty shape");
    for (int64_t d : n.shape)
      if (d <= 0) fail("tensor '", n.name, "' has non-positive extent");
    if (n.is_computed()) {
      if (!n.value) fail("computed tensor '", n.name, "' has no value expression");
      if (n.axes.size() != n.shape.size())
        fail("tensor '", n.name, "': spatial axis count does not match shape rank");
      for (size_t i = 0; i < n.axes.size(); ++i)
        if (n.axes[i].extent != n.shape[i])
          fail("tensor '", n.name, "': axis extent mismatch at dim ", i);
      if (n.kind == NodeKind::GridReduce && n.reduce_axes.empty())
        fail("reduce tensor '", n.name, "' has no reduce axes");
      if (n.kind == NodeKind::GridCompute && !n.reduce_axes.empty())
        fail("grid compute '", n.name, "' cannot have reduce axes");
      std::set<std::string> declared;
      for (const Axis& a : n.axes) declared.insert(a.name);
      for (const Axis& a : n.reduce_axes)
        if (!declared.insert(a.name).second) fail("duplicate axis '", a.name, "'");
      std::vector<std::string> vars;
      collect_vars(n.value, vars);
      for (const std::string& v : vars)
        if (!declared.count(v)) fail("tensor '", n.name, "' uses undeclared axis '", v, "'");
      std::vector<Expr> loads;
      collect_loads(n.value, loads);
      for (const Expr& l : loads) {
        bool defined_earlier = false;
        for (const TensorNode& m : nodes) {
          if (&m == &n) break;
          if (m.name == l->name) {
            defined_earlier = true;
            if (l->args.size() != m.shape.size())
              fail("access to '", l->name, "' in '", n.name, "' has wrong rank");
            break;
          }
        }
        if (!defined_earlier)
          fail("tensor '", n.name, "' reads '", l->name, "' which is not defined before it");
      }
    }
  }
  for (const std::string& i : inputs) {
    const TensorNode* n = find(i);
    if (!n || n->kind != NodeKind::Input) fail("declared input '", i, "' is not an input node");
  }
  for (const std::string& o : outputs) {
    const TensorNode* n = find(o);
    if (!n || !n->is_computed()) fail("declared output '", o, "' is not a computed node");
  }
}

// ---------------------------------------------------------------------------
// Affine access analysis

namespace {

struct AffineBuilder {
  const std::vector<Axis>& axes;
  bool ok = true;

  std::optional<size_t> axis_index(const std::string& name) const {
    for (size_t i = 0; i < axes.size(); ++i)
      if (axes[i].name == name) return i;
    return std::nullopt;
  }

  // Accumulates scale*expr into out; returns false when not affine.
  bool visit(const Expr& e, int64_t scale, AffineIndex& out) {
    switch (e->kind) {
      case ExprKind::IntImm:
        out.offset += scale * e->ival;
        return true;
      case ExprKind::Var: {
        auto idx = axis_index(e->name);
        if (!idx) return false;
        out.terms.push_back({*idx, scale});
        return true;
      }
      case ExprKind::Binary:
        switch (e->bop) {
          case BinOp::Add:
            return visit(e->args[0], scale, out) && visit(e->args[1], scale, out);
          case BinOp::Sub:
            return visit(e->args[0], scale, out) && visit(e->args[1], -scale, out);
          case BinOp::Mul:
            if (e->args[0]->kind == ExprKind::IntImm)
              return visit(e->args[1], scale * e->args[0]->ival, out);
            if (e->args[1]->kind == ExprKind::IntImm)
              return visit(e->args[0], scale * e->args[1]->ival, out);
            return false;
          default:
            return false;
        }
      case ExprKind::Unary:
        if (e->uop == UnOp::Neg) return visit(e->args[0], -scale, out);
        return false;
      default:
        return false;
    }
  }
};

// Merges duplicate axes and drops zero coeffs and extent-1 axes.
void normalize_affine(AffineIndex& idx, const std::vector<Axis>& axes) {
  std::vector<int64_t> coeff(axes.size(), 0);
  for (const AffineTerm& t : idx.terms) coeff[t.axis] += t.coeff;
  idx.terms.clear();
  for (size_t a = 0; a < axes.size(); ++a) {
    if (coeff[a] == 0) continue;
    if (axes[a].extent == 1) continue;  // contributes nothing: axis value is always 0
    idx.terms.push_back({a, coeff[a]});
  }
}

}  // namespace

std::optional<std::vector<AffineIndex>> analyze_affine_access(const Expr& load_node,
                                                              const std::vector<Axis>& axes) {
  if (load_node->kind != ExprKind::Load) fail("analyze_affine_access expects a Load");
  std::vector<AffineIndex> out;
  for (const Expr& ix : load_node->args) {
    AffineIndex ai;
    AffineBuilder b{axes};
    if (!b.visit(ix, 1, ai)) return std::nullopt;
    normalize_affine(ai, axes);
    out.push_back(std::move(ai));
  }
  return out;
}

bool affine_access_injective(const std::vector<AffineIndex>& access,
                             const std::vector<Axis>& axes) {
  std::vector<int> uses(axes.size(), 0);
  for (const AffineIndex& ai : access)
    for (const AffineTerm& t : ai.terms) ++uses[t.axis];
  for (size_t a = 0; a < axes.size(); ++a) {
    if (axes[a].extent == 1) continue;
    if (uses[a] != 1) return false;
  }
  // Mixed-radix packing per index expression: |c_t| >= |c_{t+1}| * e_{t+1}.
  for (const AffineIndex& ai : access) {
    std::vector<AffineTerm> terms = ai.terms;
    std::sort(terms.begin(), terms.end(), [](const AffineTerm& x, const AffineTerm& y) {
      return std::abs(x.coeff) > std::abs(y.coeff);
    });
    for (size_t t = 0; t + 1 < terms.size(); ++t) {
      int64_t next_span = std::abs(terms[t + 1].coeff) * axes[terms[t + 1].axis].extent;
      if (std::abs(terms[t].coeff) < next_span) return false;
    }
  }
  return true;
}

bool affine_access_bijective(const std::vector<AffineIndex>& access, const std::vector<Axis>& axes,
                             const std::vector<int64_t>& input_shape) {
  if (access.size() != input_shape.size()) return false;
  if (!affine_access_injective(access, axes)) return false;
  for (size_t d = 0; d < access.size(); ++d) {
    int64_t lo = access[d].offset, hi = access[d].offset, count = 1;
    for (const AffineTerm& t : access[d].terms) {
      int64_t span = t.coeff * (axes[t.axis].extent - 1);
      lo += std::min<int64_t>(span, 0);
      hi += std::max<int64_t>(span, 0);
      count *= axes[t.axis].extent;
    }
    if (lo != 0 || hi != input_shape[d] - 1 || count != input_shape[d]) return false;
  }
  return true;
}

OpClass classify(const ComputeDAG& dag, const TensorNode& node) {
  if (!node.is_computed()) fail("classify expects a computed node");
  if (node.kind == NodeKind::GridReduce) return OpClass::Reduction;

  // Injective by definition (no reduction). Decide bijectivity conservatively.
  std::vector<Expr> loads;
  collect_loads(node.value, loads);
  std::unordered_map<std::string, Expr> first_access;
  for (const Expr& l : loads) {
    auto [it, inserted] = first_access.emplace(l->name, l);
    if (!inserted && !expr_equal(it->second, l)) return OpClass::Injective;
  }
  bool some_bijection = false;
  for (const auto& [name, l] : first_access) {
    auto affine = analyze_affine_access(l, node.axes);
    if (!affine) return OpClass::Injective;
    const TensorNode* src = dag.find(name);
    if (!src) return OpClass::Injective;
    if (affine_access_bijective(*affine, node.axes, src->shape)) some_bijection = true;
  }
  return some_bijection ? OpClass::Bijective : OpClass::Injective;
}

// ---------------------------------------------------------------------------
// Reference interpreter

namespace {

struct EvalValue {
  bool is_f = false;
  double f = 0.0;
  int64_t i = 0;

  double as_f() const { return is_f ? f : static_cast<double>(i); }
  int64_t as_i() const {
    if (is_f) fail("expected integer value, got float");
    return i;
  }
  bool truthy() const { return is_f ? f != 0.0 : i != 0; }
};

EvalValue fv(double v) { return {true, v, 0}; }
EvalValue iv(int64_t v) { return {false, 0.0, v}; }

struct EvalContext {
  std::unordered_map<std::string, const Tensor*> tensors;
  std::vector<std::pair<const std::string*, int64_t>> vars;

  int64_t lookup_var(const std::string& name) const {
    for (const auto& [n, v] : vars)
      if (*n == name) return v;
    fail("unbound axis '", name, "'");
  }
};

EvalValue eval_expr(const Expr& e, const EvalContext& ctx) {
  switch (e->kind) {
    case ExprKind::IntImm: return iv(e->ival);
    case ExprKind::FloatImm: return fv(e->fval);
    case ExprKind::Var: return iv(ctx.lookup_var(e->name));
    case ExprKind::ThreadIdx:
    case ExprKind::BlockIdx: fail("thread/block index in a computation definition");
    case ExprKind::Binary: {
      EvalValue a = eval_expr(e->args[0], ctx);
      EvalValue b = eval_expr(e->args[1], ctx);
      if (a.is_f || b.is_f) {
        double x = a.as_f(), y = b.as_f();
        switch (e->bop) {
          case BinOp::Add: return fv(x + y);
          case BinOp::Sub: return fv(x - y);
          case BinOp::Mul: return fv(x * y);
          case BinOp::Div: return fv(x / y);
          case BinOp::Mod: fail("float modulo unsupported");
          case BinOp::Min: return fv(std::min(x, y));
          case BinOp::Max: return fv(std::max(x, y));
          case BinOp::And: return iv(x != 0.0 && y != 0.0);
          case BinOp::Or: return iv(x != 0.0 || y != 0.0);
          case BinOp::Lt: return iv(x < y);
          case BinOp::Le: return iv(x <= y);
          case BinOp::Gt: return iv(x > y);
          case BinOp::Ge: return iv(x >= y);
          case BinOp::Eq: return iv(x == y);
          case BinOp::Ne: return iv(x != y);
        }
      }
      int64_t x = a.i, y = b.i;
      switch (e->bop) {
        case BinOp::Add: return iv(x + y);
        case BinOp::Sub: return iv(x - y);
        case BinOp::Mul: return iv(x * y);
        case BinOp::Div:
          if (y == 0) fail("integer division by zero");
          return iv(floordiv(x, y));
        case BinOp::Mod:
          if (y == 0) fail("integer modulo by zero");
          return iv(floormod(x, y));
        case BinOp::Min: return iv(std::min(x, y));
        case BinOp::Max: return iv(std::max(x, y));
        case BinOp::And: return iv(x != 0 && y != 0);
        case BinOp::Or: return iv(x != 0 || y != 0);
        case BinOp::Lt: return iv(x < y);
        case BinOp::Le: return iv(x <= y);
        case BinOp::Gt: return iv(x > y);
        case BinOp::Ge: return iv(x >= y);
        case BinOp::Eq: return iv(x == y);
        case BinOp::Ne: return iv(x != y);
      }
      fail("unreachable binop");
    }
    case ExprKind::Unary: {
      EvalValue a = eval_expr(e->args[0], ctx);
      switch (e->uop) {
        case UnOp::Neg: return a.is_f ? fv(-a.f) : iv(-a.i);
        case UnOp::Relu: return a.is_f ? fv(std::max(a.f, 0.0)) : iv(std::max<int64_t>(a.i, 0));
        case UnOp::Exp: return fv(std::exp(a.as_f()));
        case UnOp::Sqrt: return fv(std::sqrt(a.as_f()));
        case UnOp::CastF32: return fv(a.as_f());
        case UnOp::CastI32: return iv(a.is_f ? static_cast<int64_t>(a.f) : a.i);
      }
      fail("unreachable unop");
    }
    case ExprKind::Select: {
      // Short-circuit: only the chosen branch is evaluated, so guarded
      // accesses never touch out-of-bounds elements.
      EvalValue c = eval_expr(e->args[0], ctx);
      return eval_expr(c.truthy() ? e->args[1] : e->args[2], ctx);
    }
    case ExprKind::Load: {
      auto it = ctx.tensors.find(e->name);
      if (it == ctx.tensors.end()) fail("reference eval: unknown tensor '", e->name, "'");
      const Tensor& t = *it->second;
      std::vector<int64_t> idx(e->args.size());
      for (size_t i = 0; i < idx.size(); ++i) idx[i] = eval_expr(e->args[i], ctx).as_i();
      int64_t flat = t.flatten(idx);
      return t.is_float() ? fv(t.fdata[flat]) : iv(t.idata[flat]);
    }
    case ExprKind::TableLookup: {
      int64_t i = eval_expr(e->args[0], ctx).as_i();
      if (i < 0 || static_cast<size_t>(i) >= e->table->size())
        fail("table lookup out of range: ", i);
      return iv((*e->table)[i]);
    }
  }
  fail("unreachable expr kind");
}

EvalValue combiner_identity(Combiner c, bool is_float) {
  switch (c) {
    case Combiner::Sum: return is_float ? fv(0.0) : iv(0);
    case Combiner::Max:
      return is_float ? fv(-std::numeric_limits<double>::infinity())
                      : iv(std::numeric_limits<int32_t>::min());
    case Combiner::Min:
      return is_float ? fv(std::numeric_limits<double>::infinity())
                      : iv(std::numeric_limits<int32_t>::max());
  }
  fail("unreachable combiner");
}

EvalValue combine(Combiner c, EvalValue acc, EvalValue x) {
  if (acc.is_f || x.is_f) {
    double a = acc.as_f(), b = x.as_f();
    switch (c) {
      case Combiner::Sum: return fv(a + b);
      case Combiner::Max: return fv(std::max(a, b));
      case Combiner::Min: return fv(std::min(a, b));
    }
  }
  switch (c) {
    case Combiner::Sum: return iv(acc.i + x.i);
    case Combiner::Max: return iv(std::max(acc.i, x.i));
    case Combiner::Min: return iv(std::min(acc.i, x.i));
  }
  fail("unreachable combiner");
}

// Row-major odometer over axis extents; returns false when wrapped around.
bool advance(std::vector<int64_t>& coords, const std::vector<Axis>& axes) {
  for (size_t i = coords.size(); i-- > 0;) {
    if (++coords[i] < axes[i].extent) return true;
    coords[i] = 0;
  }
  return false;
}

void store_value(Tensor& t, int64_t flat, const EvalValue& v, const std::string& name) {
  if (t.is_float()) {
    t.fdata[flat] = v.as_f();
  } else {
    if (v.is_f) fail("float value stored to i32 tensor '", name, "'");
    t.idata[flat] = v.i;
  }
}

}  // namespace

TensorMap reference_eval(const ComputeDAG& dag, const TensorMap& inputs) {
  dag.validate();
  TensorMap env;
  EvalContext ctx;
  for (const TensorNode& node : dag.nodes) {
    if (node.kind == NodeKind::Input) {
      auto it = inputs.find(node.name);
      if (it == inputs.end()) fail("missing input tensor '", node.name, "'");
      if (it->second.shape != node.shape) fail("input '", node.name, "' has wrong shape");
      if (it->second.dtype != node.dtype) fail("input '", node.name, "' has wrong dtype");
      env[node.name] = it->second;
      continue;
    }
    Tensor out = Tensor::zeros(node.dtype, node.shape);
    ctx.tensors.clear();
    for (const auto& [name, t] : env) ctx.tensors.emplace(name, &t);

    std::vector<int64_t> scoord(node.axes.size(), 0);
    std::vector<int64_t> rcoord(node.reduce_axes.size(), 0);
    ctx.vars.clear();
    for (size_t i = 0; i < node.axes.size(); ++i) ctx.vars.emplace_back(&node.axes[i].name, 0);
    for (size_t i = 0; i < node.reduce_axes.size(); ++i)
      ctx.vars.emplace_back(&node.reduce_axes[i].name, 0);

    int64_t flat = 0;
    bool more = !node.axes.empty();
    do {
      for (size_t i = 0; i < scoord.size(); ++i) ctx.vars[i].second = scoord[i];
      EvalValue result;
      if (node.kind == NodeKind::GridCompute) {
        result = eval_expr(node.value, ctx);
      } else {
        result = combiner_identity(node.combiner, node.dtype == DType::F32);
        std::fill(rcoord.begin(), rcoord.end(), 0);
        do {
          for (size_t i = 0; i < rcoord.size(); ++i)
            ctx.vars[scoord.size() + i].second = rcoord[i];
          result = combine(node.combiner, result, eval_expr(node.value, ctx));
        } while (advance(rcoord, node.reduce_axes));
      }
      store_value(out, flat++, result, node.name);
    } while (more && advance(scoord, node.axes));
    env[node.name] = std::move(out);
  }

  TensorMap result;
  for (const std::string& o : dag.outputs) result[o] = env.at(o);
  return result;
}

// ---------------------------------------------------------------------------
// Builders

namespace {

TensorNode input_node(std::string name, std::vector<int64_t> shape, DType dtype) {
  TensorNode n;
  n.name = std::move(name);
  n.shape = std::move(shape);
  n.dtype = dtype;
  n.kind = NodeKind::Input;
  return n;
}

std::vector<Axis> make_axes(const std::vector<int64_t>& shape, const std::string& prefix) {
  std::vector<Axis> axes;
  for (size_t i = 0; i < shape.size(); ++i) axes.push_back({prefix + std::to_string(i), shape[i]});
  return axes;
}

std::vector<Expr> axis_vars(const std::vector<Axis>& axes) {
  std::vector<Expr> v;
  for (const Axis& a : axes) v.push_back(var(a.name));
  return v;
}

}  // namespace

ComputeDAG matmul_dag(int64_t m, int64_t n, int64_t k, DType dtype) {
  if (m <= 0 || n <= 0 || k <= 0) fail("matmul extents must be positive");
  ComputeDAG dag;
  dag.nodes.push_back(input_node("A", {m, k}, dtype));
  dag.nodes.push_back(input_node("B", {k, n}, dtype));
  TensorNode c;
  c.name = "C";
  c.shape = {m, n};
  c.dtype = dtype;
  c.kind = NodeKind::GridReduce;
  c.axes = {{"i", m}, {"j", n}};
  c.reduce_axes = {{"k", k}};
  c.combiner = Combiner::Sum;
  c.value = mul(load("A", {var("i"), var("k")}), load("B", {var("k"), var("j")}));
  dag.nodes.push_back(std::move(c));
  dag.inputs = {"A", "B"};
  dag.outputs = {"C"};
  dag.validate();
  return dag;
}

ComputeDAG conv2d_im2col_dag(int64_t n, int64_t c, int64_t h, int64_t w, int64_t f, int64_t kh,
                             int64_t kw, int64_t stride, int64_t pad, DType dtype) {
  if (n <= 0 || c <= 0 || h <= 0 || w <= 0 || f <= 0 || kh <= 0 || kw <= 0)
    fail("conv extents must be positive");
  if (stride <= 0 || pad < 0) fail("invalid conv stride/padding");
  if (kh > h + 2 * pad || kw > w + 2 * pad) fail("conv kernel larger than padded input");
  int64_t ho = conv_out_extent(h, kh, stride, pad);
  int64_t wo = conv_out_extent(w, kw, stride, pad);
  int64_t gk = c * kh * kw;   // GEMM reduction extent
  int64_t gn = n * ho * wo;   // GEMM output columns

  ComputeDAG dag;
  dag.nodes.push_back(input_node("X", {n, c, h, w}, dtype));
  dag.nodes.push_back(input_node("W", {f, c, kh, kw}, dtype));

  {  // im2col gather
    TensorNode col;
    col.name = "Col";
    col.shape = {gk, gn};
    col.dtype = dtype;
    col.kind = NodeKind::GridCompute;
    col.axes = {{"r", gk}, {"s", gn}};
    Expr r = var("r"), s = var("s");
    Expr ch = div(r, imm(kh * kw));
    Expr fh = mod(div(r, imm(kw)), imm(kh));
    Expr fw = mod(r, imm(kw));
    Expr img = div(s, imm(ho * wo));
    Expr oh = mod(div(s, imm(wo)), imm(ho));
    Expr ow = mod(s, imm(wo));
    Expr ih = add(sub(mul(oh, imm(stride)), imm(pad)), fh);
    Expr iw = add(sub(mul(ow, imm(stride)), imm(pad)), fw);
    Expr pixel = load("X", {img, ch, ih, iw});
    if (pad > 0) {
      Expr in_bounds = land(land(ge(ih, imm(0)), lt(ih, imm(h))),
                            land(ge(iw, imm(0)), lt(iw, imm(w))));
      col.value = select(in_bounds, pixel, zero_of(dtype));
    } else {
      col.value = pixel;
    }
    dag.nodes.push_back(std::move(col));
  }
  {  // filter flatten
    TensorNode wf;
    wf.name = "Wf";
    wf.shape = {f, gk};
    wf.dtype = dtype;
    wf.kind = NodeKind::GridCompute;
    wf.axes = {{"p", f}, {"r", gk}};
    Expr r = var("r");
    wf.value = load("W", {var("p"), div(r, imm(kh * kw)), mod(div(r, imm(kw)), imm(kh)),
                          mod(r, imm(kw))});
    dag.nodes.push_back(std::move(wf));
  }
  {  // GEMM anchor
    TensorNode y;
    y.name = "Y";
    y.shape = {f, gn};
    y.dtype = dtype;
    y.kind = NodeKind::GridReduce;
    y.axes = {{"p", f}, {"s", gn}};
    y.reduce_axes = {{"r", gk}};
    y.combiner = Combiner::Sum;
    y.value = mul(load("Wf", {var("p"), var("r")}), load("Col", {var("r"), var("s")}));
    dag.nodes.push_back(std::move(y));
  }
  {  // reshape back to NFHW
    TensorNode out;
    out.name = "Out";
    out.shape = {n, f, ho, wo};
    out.dtype = dtype;
    out.kind = NodeKind::GridCompute;
    out.axes = {{"n", n}, {"p", f}, {"oh", ho}, {"ow", wo}};
    out.value = load("Y", {var("p"), add(mul(add(mul(var("n"), imm(ho)), var("oh")), imm(wo)),
                                         var("ow"))});
    dag.nodes.push_back(std::move(out));
  }
  dag.inputs = {"X", "W"};
  dag.outputs = {"Out"};
  dag.validate();
  return dag;
}

ComputeDAG elementwise_unary_dag(UnOp op, std::vector<int64_t> shape, DType dtype) {
  if ((op == UnOp::Exp || op == UnOp::Sqrt) && dtype != DType::F32)
    fail("exp/sqrt require f32 tensors");
  ComputeDAG dag;
  dag.nodes.push_back(input_node("X", shape, dtype));
  TensorNode y;
  y.name = "Y";
  y.shape = shape;
  y.dtype = dtype;
  y.kind = NodeKind::GridCompute;
  y.axes = make_axes(shape, "i");
  y.value = unary(op, load("X", axis_vars(y.axes)));
  dag.nodes.push_back(std::move(y));
  dag.inputs = {"X"};
  dag.outputs = {"Y"};
  dag.validate();
  return dag;
}

ComputeDAG elementwise_binary_dag(BinOp op, std::vector<int64_t> shape, DType dtype) {
  ComputeDAG dag;
  dag.nodes.push_back(input_node("X0", shape, dtype));
  dag.nodes.push_back(input_node("X1", shape, dtype));
  TensorNode y;
  y.name = "Y";
  y.shape = shape;
  y.dtype = dtype;
  y.kind = NodeKind::GridCompute;
  y.axes = make_axes(shape, "i");
  y.value = binary(op, load("X0", axis_vars(y.axes)), load("X1", axis_vars(y.axes)));
  dag.nodes.push_back(std::move(y));
  dag.inputs = {"X0", "X1"};
  dag.outputs = {"Y"};
  dag.validate();
  return dag;
}

ComputeDAG reshape_dag(std::vector<int64_t> in_shape, std::vector<int64_t> out_shape,
                       DType dtype) {
  int64_t in_size = 1, out_size = 1;
  for (int64_t d : in_shape) in_size *= d;
  for (int64_t d : out_shape) out_size *= d;
  if (in_size != out_size) fail("reshape must preserve element count");
  ComputeDAG dag;
  dag.nodes.push_back(input_node("X", in_shape, dtype));
  TensorNode y;
  y.name = "Y";
  y.shape = out_shape;
  y.dtype = dtype;
  y.kind = NodeKind::GridCompute;
  y.axes = make_axes(out_shape, "i");
  Expr flat = imm(0);
  for (size_t i = 0; i < y.axes.size(); ++i)
    flat = add(mul(flat, imm(out_shape[i])), var(y.axes[i].name));
  flat = fold(flat);
  std::vector<Expr> in_idx;
  if (in_shape.size() == 1) {
    in_idx.push_back(flat);
  } else {
    int64_t stride = in_size;
    for (size_t i = 0; i < in_shape.size(); ++i) {
      stride /= in_shape[i];
      Expr e = div(flat, imm(stride));
      if (i > 0) e = mod(e, imm(in_shape[i]));
      in_idx.push_back(fold(e));
    }
  }
  y.value = load("X", std::move(in_idx));
  dag.nodes.push_back(std::move(y));
  dag.inputs = {"X"};
  dag.outputs = {"Y"};
  dag.validate();
  return dag;
}

ComputeDAG transpose_dag(std::vector<int64_t> shape, std::vector<size_t> perm, DType dtype) {
  if (perm.size() != shape.size()) fail("transpose permutation rank mismatch");
  std::vector<bool> seen(shape.size(), false);
  for (size_t p : perm) {
    if (p >= shape.size() || seen[p]) fail("invalid transpose permutation");
    seen[p] = true;
  }
  std::vector<int64_t> out_shape(shape.size());
  for (size_t i = 0; i < perm.size(); ++i) out_shape[i] = shape[perm[i]];
  ComputeDAG dag;
  dag.nodes.push_back(input_node("X", shape, dtype));
  TensorNode y;
  y.name = "Y";
  y.shape = out_shape;
  y.dtype = dtype;
  y.kind = NodeKind::GridCompute;
  y.axes = make_axes(out_shape, "i");
  std::vector<Expr> in_idx(shape.size());
  for (size_t i = 0; i < perm.size(); ++i) in_idx[perm[i]] = var(y.axes[i].name);
  y.value = load("X", std::move(in_idx));
  dag.nodes.push_back(std::move(y));
  dag.inputs = {"X"};
  dag.outputs = {"Y"};
  dag.validate();
  return dag;
}

ComputeDAG batchnorm_inference_dag(int64_t n, int64_t c, int64_t h, int64_t w, DType dtype) {
  ComputeDAG dag;
  dag.nodes.push_back(input_node("X", {n, c, h, w}, dtype));
  dag.nodes.push_back(input_node("Scale", {c}, dtype));
  dag.nodes.push_back(input_node("Shift", {c}, dtype));
  TensorNode y;
  y.name = "Y";
  y.shape = {n, c, h, w};
  y.dtype = dtype;
  y.kind = NodeKind::GridCompute;
  y.axes = {{"n", n}, {"c", c}, {"h", h}, {"w", w}};
  Expr x = load("X", {var("n"), var("c"), var("h"), var("w")});
  y.value = add(mul(x, load("Scale", {var("c")})), load("Shift", {var("c")}));
  dag.nodes.push_back(std::move(y));
  dag.inputs = {"X", "Scale", "Shift"};
  dag.outputs = {"Y"};
  dag.validate();
  return dag;
}

std::pair<Tensor, Tensor> fold_batchnorm_params(const Tensor& gamma, const Tensor& beta,
                                                const Tensor& mean, const Tensor& var,
                                                double eps) {
  if (gamma.dtype != DType::F32) fail("batchnorm folding expects f32 parameters");
  Tensor scale = Tensor::zeros(DType::F32, gamma.shape);
  Tensor shift = Tensor::zeros(DType::F32, gamma.shape);
  for (size_t i = 0; i < gamma.fdata.size(); ++i) {
    double s = gamma.fdata[i] / std::sqrt(var.fdata[i] + eps);
    scale.fdata[i] = s;
    shift.fdata[i] = beta.fdata[i] - mean.fdata[i] * s;
  }
  return {scale, shift};
}

ComputeDAG reduce_dag(std::vector<int64_t> shape, std::vector<size_t> dims, Combiner combiner,
                      DType dtype) {
  if (dims.empty()) fail("reduce needs at least one dimension");
  std::vector<bool> reduced(shape.size(), false);
  for (size_t d : dims) {
    if (d >= shape.size() || reduced[d]) fail("invalid reduce dimension");
    reduced[d] = true;
  }
  ComputeDAG dag;
  dag.nodes.push_back(input_node("X", shape, dtype));
  TensorNode y;
  y.name = "Y";
  y.dtype = dtype;
  y.kind = NodeKind::GridReduce;
  y.combiner = combiner;
  std::vector<Expr> in_idx(shape.size());
  for (size_t i = 0; i < shape.size(); ++i) {
    std::string axis = (reduced[i] ? "r" : "i") + std::to_string(i);
    in_idx[i] = var(axis);
    if (reduced[i]) {
      y.reduce_axes.push_back({axis, shape[i]});
    } else {
      y.axes.push_back({axis, shape[i]});
      y.shape.push_back(shape[i]);
    }
  }
  if (y.axes.empty()) {  // full reduction: keep a unit spatial axis
    y.axes.push_back({"i", 1});
    y.shape.push_back(1);
  }
  y.value = load("X", std::move(in_idx));
  dag.nodes.push_back(std::move(y));
  dag.inputs = {"X"};
  dag.outputs = {"Y"};
  dag.validate();
  return dag;
}

}  // namespace taskmap
