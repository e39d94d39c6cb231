#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taskmap/expr.hpp"
#include "taskmap/tensor.hpp"

namespace taskmap {

struct Axis {
  std::string name;
  int64_t extent;
};

enum class Combiner { Sum, Max, Min };
const char* combiner_name(Combiner c);
Combiner combiner_from_name(const std::string& s);

enum class NodeKind { Input, GridCompute, GridReduce };

// One tensor in a computation definition: a placeholder input, a grid compute
// (one value expression per output coordinate), or a grid reduction.
struct TensorNode {
  std::string name;
  std::vector<int64_t> shape;
  DType dtype = DType::F32;
  NodeKind kind = NodeKind::Input;
  std::vector<Axis> axes;         // spatial axes; extents must equal shape
  std::vector<Axis> reduce_axes;  // GridReduce only
  Combiner combiner = Combiner::Sum;
  Expr value;                     // computed kinds only

  bool is_computed() const { return kind != NodeKind::Input; }
};

// Topologically ordered operator mathematics with designated inputs/outputs.
struct ComputeDAG {
  std::vector<TensorNode> nodes;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  const TensorNode* find(const std::string& name) const;
  const TensorNode& at(const std::string& name) const;
  void validate() const;
};

enum class OpClass { Reduction, Injective, Bijective };
const char* opclass_name(OpClass c);

// Conservative operator classification. GridReduce nodes are reductions.
// GridCompute nodes are injective; they are additionally bijective when the
// access pattern is an affine reindexing where each input element is read by
// at most one output coordinate and some input covers the output one-to-one.
OpClass classify(const ComputeDAG& dag, const TensorNode& node);

// Element-by-element oracle. Evaluates nodes in order; reductions accumulate
// in row-major order of the declared reduce axes. Returns the output tensors.
TensorMap reference_eval(const ComputeDAG& dag, const TensorMap& inputs);

// --- Affine access analysis (used by classification and epilogue inversion) --

struct AffineTerm {
  size_t axis;    // index into the node's spatial axes
  int64_t coeff;  // nonzero
};

// One index expression of a Load: offset + sum(coeff * axis).
struct AffineIndex {
  std::vector<AffineTerm> terms;
  int64_t offset = 0;
};

// Affine decomposition of all index expressions of one Load, or nullopt when
// any index is not affine in the spatial axes.
std::optional<std::vector<AffineIndex>> analyze_affine_access(const Expr& load_node,
                                                              const std::vector<Axis>& axes);

// True when the affine access maps distinct output coordinates to distinct
// input elements (mixed-radix packing with each axis used exactly once).
bool affine_access_injective(const std::vector<AffineIndex>& access,
                             const std::vector<Axis>& axes);

// True when, additionally, the access covers the whole input tensor.
bool affine_access_bijective(const std::vector<AffineIndex>& access,
                             const std::vector<Axis>& axes,
                             const std::vector<int64_t>& input_shape);

// --- Builders -----------------------------------------------------------

ComputeDAG matmul_dag(int64_t m, int64_t n, int64_t k, DType dtype);

// Convolution lowered through im2col: gather (injective) -> matmul (reduction
// anchor) -> reshape back to NFHW (bijective), with a flatten transform on the
// filter input.
ComputeDAG conv2d_im2col_dag(int64_t n, int64_t c, int64_t h, int64_t w, int64_t f, int64_t kh,
                             int64_t kw, int64_t stride, int64_t pad, DType dtype);

ComputeDAG elementwise_unary_dag(UnOp op, std::vector<int64_t> shape, DType dtype);
ComputeDAG elementwise_binary_dag(BinOp op, std::vector<int64_t> shape, DType dtype);
ComputeDAG reshape_dag(std::vector<int64_t> in_shape, std::vector<int64_t> out_shape, DType dtype);
ComputeDAG transpose_dag(std::vector<int64_t> shape, std::vector<size_t> perm, DType dtype);

// Inference-time batch norm folded to y = x * scale[c] + shift[c].
ComputeDAG batchnorm_inference_dag(int64_t n, int64_t c, int64_t h, int64_t w, DType dtype);

// Folds (gamma, beta, mean, var, eps) into the (scale, shift) pair consumed by
// batchnorm_inference_dag.
std::pair<Tensor, Tensor> fold_batchnorm_params(const Tensor& gamma, const Tensor& beta,
                                                const Tensor& mean, const Tensor& var, double eps);

ComputeDAG reduce_dag(std::vector<int64_t> shape, std::vector<size_t> dims, Combiner combiner,
                      DType dtype);

// Output geometry of a convolution.
inline int64_t conv_out_extent(int64_t in, int64_t kernel, int64_t stride, int64_t pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

}  // namespace taskmap
