// Copyright (c) 2026 pcc contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PCC_TENSOR_HPP
#define PCC_TENSOR_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pcc
{

class Tape;

using NodeId = int32_t;
constexpr NodeId kNoNode = -1;

/// Dense row-major tensor of 64-bit floats. A tensor optionally carries a
/// handle into a Tape; operations record themselves when any input does.
/// Values are immutable once produced by an op (treat data as read-only
/// except when mutating raw parameter storage between passes).
struct Tensor
{
  std::vector<int64_t> shape;
  std::vector<double> data;
  Tape * tape = nullptr;
  NodeId node = kNoNode;

  Tensor() = default;
  Tensor(std::vector<int64_t> s, std::vector<double> d);

  static Tensor zeros(std::vector<int64_t> s);
  static Tensor full(std::vector<int64_t> s, double value);
  static Tensor scalar(double value);

  int64_t numel() const;
  int rank() const {return static_cast<int>(shape.size());}
  int64_t dim(int i) const {return shape[static_cast<size_t>(i)];}
  bool on_tape() const {return tape != nullptr && node != kNoNode;}

  /// Value of a single-element tensor.
  double scalar_value() const;

  /// Copy with tape binding dropped (constant view of the same values).
  Tensor detached() const;
};

/// Gradient accumulator per tape node. grad() always pins the result to the
/// argument's shape. Unreached nodes yield zeros.
class Gradients
{
public:
  bool has(NodeId id) const;
  Tensor grad(const Tensor & t) const;

private:
  friend class Tape;
  std::vector<std::vector<double>> by_node_;
};

/// Backward rule of one recorded node: receives the upstream gradient and
/// accumulates into parent buffers (nullptr where a parent is a constant).
using BackwardFn =
  std::function<void (const double * grad, const std::vector<std::vector<double> *> & parents)>;

/// Append-only record of a forward pass. Nodes are stored in topological
/// order by construction; backward() walks them once, in reverse.
class Tape
{
public:
  NodeId make_leaf(int64_t numel);
  NodeId record(int64_t numel, std::vector<NodeId> parents, BackwardFn fn);

  /// Reverse sweep from a scalar loss node. Leaves unreachable from the loss
  /// get zero gradients.
  Gradients backward(const Tensor & loss) const;

  size_t size() const {return nodes_.size();}

private:
  struct Node
  {
    int64_t numel;
    std::vector<NodeId> parents;
    BackwardFn fn;
  };
  std::vector<Node> nodes_;
};

/// Register `value` as a differentiable leaf on `tape`.
Tensor make_leaf(Tape & tape, const Tensor & value);

// --- Operations -----------------------------------------------------------
// Each op validates shapes, computes the value, and records a node when any
// input is on a tape. Forward results on finite inputs are finite.

Tensor matmul(const Tensor & a, const Tensor & b);

Tensor add(const Tensor & a, const Tensor & b);
Tensor sub(const Tensor & a, const Tensor & b);
Tensor mul(const Tensor & a, const Tensor & b);

/// b's shape must equal the trailing dimensions of a's shape; b is repeated
/// along the leading dimensions. This is the only broadcasting rule.
Tensor broadcast_add(const Tensor & a, const Tensor & b);

Tensor relu(const Tensor & a);
Tensor tanh_op(const Tensor & a);
/// sqrt(max(x, 0)); subgradient 0 where x <= 0.
Tensor sqrt_op(const Tensor & a);
Tensor scale(const Tensor & a, double c);

/// Concatenate along the last dimension; all other dimensions must match.
Tensor concat_last(const Tensor & a, const Tensor & b);
/// Stack two matrices with equal column counts along dim 0.
Tensor concat_rows(const Tensor & a, const Tensor & b);

Tensor reshape(const Tensor & a, std::vector<int64_t> new_shape);

/// Select rows of a 2-D tensor. The index set is recorded on the tape and
/// gradients scatter back additively.
Tensor gather_rows(const Tensor & a, const std::vector<int64_t> & idx);

/// [N,K,D] -> [N,K,D]; exponential normalization over the K axis per (n,d)
/// pair, computed with max subtraction. Output slices over K sum to 1.
Tensor softmax_channelwise(const Tensor & logits);

/// [N,K,D] -> [N,D] reductions over the middle axis.
Tensor sum_mid(const Tensor & a);
Tensor max_mid(const Tensor & a);

/// [N,D] -> [1,D]; max over rows (first index wins ties).
Tensor max_rows(const Tensor & a);
/// [N,D] -> [N,1]; sum over the last axis.
Tensor row_sum(const Tensor & a);

Tensor sum_all(const Tensor & a);
Tensor mean_all(const Tensor & a);

std::string shape_str(const std::vector<int64_t> & s);

}  // namespace pcc

#endif  // PCC_TENSOR_HPP
