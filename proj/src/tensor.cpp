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

#include "pcc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pcc/errors.hpp"

namespace pcc
{

namespace
{

int64_t product(const std::vector<int64_t> & s)
{
  int64_t n = 1;
  for (int64_t d : s) {
    n *= d;
  }
  return n;
}

Tape * common_tape(std::initializer_list<const Tensor *> xs)
{
  Tape * t = nullptr;
  for (const Tensor * x : xs) {
    if (!x->on_tape()) {continue;}
    if (t != nullptr && t != x->tape) {
      throw ContractError("tensor operands belong to different tapes");
    }
    t = x->tape;
  }
  return t;
}

Tensor finish(Tape * tape, std::vector<int64_t> shape, std::vector<double> data,
  std::vector<NodeId> parents, const std::function<BackwardFn()> & make_fn)
{
  Tensor out(std::move(shape), std::move(data));
  if (tape != nullptr) {
    out.tape = tape;
    out.node = tape->record(out.numel(), std::move(parents), make_fn());
  }
  return out;
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> s, std::vector<double> d)
: shape(std::move(s)), data(std::move(d))
{
  if (product(shape) != static_cast<int64_t>(data.size())) {
    throw ShapeError(
      "tensor data length " + std::to_string(data.size()) +
      " does not match shape " + shape_str(shape));
  }
}

Tensor Tensor::zeros(std::vector<int64_t> s)
{
  std::vector<double> d(static_cast<size_t>(product(s)), 0.0);
  return Tensor(std::move(s), std::move(d));
}

Tensor Tensor::full(std::vector<int64_t> s, double value)
{
  std::vector<double> d(static_cast<size_t>(product(s)), value);
  return Tensor(std::move(s), std::move(d));
}

Tensor Tensor::scalar(double value)
{
  return Tensor({1}, {value});
}

int64_t Tensor::numel() const
{
  return product(shape);
}

double Tensor::scalar_value() const
{
  if (numel() != 1) {
    throw ContractError("scalar_value() on tensor of shape " + shape_str(shape));
  }
  return data[0];
}

Tensor Tensor::detached() const
{
  Tensor t(shape, data);
  return t;
}

std::string shape_str(const std::vector<int64_t> & s)
{
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) {
    os << (i ? "x" : "") << s[i];
  }
  os << "]";
  return os.str();
}

// --- Tape -------------------------------------------------------------------

NodeId Tape::make_leaf(int64_t numel)
{
  nodes_.push_back(Node{numel, {}, nullptr});
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::record(int64_t numel, std::vector<NodeId> parents, BackwardFn fn)
{
  for (NodeId p : parents) {
    if (p != kNoNode && (p < 0 || static_cast<size_t>(p) >= nodes_.size())) {
      throw ContractError("tape parent id out of range");
    }
  }
  nodes_.push_back(Node{numel, std::move(parents), std::move(fn)});
  return static_cast<NodeId>(nodes_.size() - 1);
}

Gradients Tape::backward(const Tensor & loss) const
{
  if (!loss.on_tape() || loss.tape != this) {
    throw ContractError("backward: loss tensor is not on this tape");
  }
  if (loss.numel() != 1) {
    throw ContractError("backward: loss must be scalar, got " + shape_str(loss.shape));
  }
  const NodeId root = loss.node;

  // Ancestors of the loss (every parent of a reachable node is reachable).
  std::vector<char> reach(nodes_.size(), 0);
  std::vector<NodeId> stack{root};
  reach[static_cast<size_t>(root)] = 1;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    for (NodeId p : nodes_[static_cast<size_t>(id)].parents) {
      if (p == kNoNode) {continue;}
      if (!reach[static_cast<size_t>(p)]) {
        reach[static_cast<size_t>(p)] = 1;
        stack.push_back(p);
      }
    }
  }

  Gradients g;
  g.by_node_.resize(nodes_.size());
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (reach[i]) {
      g.by_node_[i].assign(static_cast<size_t>(nodes_[i].numel), 0.0);
    }
  }
  g.by_node_[static_cast<size_t>(root)][0] = 1.0;

  // Append-only construction guarantees parents precede children, so a
  // reverse index sweep is a reverse topological order: one visit per node.
  for (NodeId id = root; id >= 0; --id) {
    const Node & node = nodes_[static_cast<size_t>(id)];
    if (!reach[static_cast<size_t>(id)] || !node.fn) {continue;}
    std::vector<std::vector<double> *> parent_bufs;
    parent_bufs.reserve(node.parents.size());
    for (NodeId p : node.parents) {
      parent_bufs.push_back(p == kNoNode ? nullptr : &g.by_node_[static_cast<size_t>(p)]);
    }
    node.fn(g.by_node_[static_cast<size_t>(id)].data(), parent_bufs);
  }
  return g;
}

bool Gradients::has(NodeId id) const
{
  return id != kNoNode && static_cast<size_t>(id) < by_node_.size() &&
         !by_node_[static_cast<size_t>(id)].empty();
}

Tensor Gradients::grad(const Tensor & t) const
{
  if (!t.on_tape()) {
    throw ContractError("grad(): tensor is not on a tape");
  }
  if (!has(t.node)) {
    return Tensor::zeros(t.shape);
  }
  return Tensor(t.shape, by_node_[static_cast<size_t>(t.node)]);
}

Tensor make_leaf(Tape & tape, const Tensor & value)
{
  Tensor t = value.detached();
  t.tape = &tape;
  t.node = tape.make_leaf(t.numel());
  return t;
}

// --- Elementwise ------------------------------------------------------------

namespace
{

void check_same_shape(const char * op, const Tensor & a, const Tensor & b)
{
  if (a.shape != b.shape) {
    throw ShapeError(
      std::string(op) + ": shapes " + shape_str(a.shape) + " vs " + shape_str(b.shape));
  }
}

}  // namespace

Tensor add(const Tensor & a, const Tensor & b)
{
  check_same_shape("add", a, b);
  Tape * tape = common_tape({&a, &b});
  std::vector<double> out(a.data.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = a.data[i] + b.data[i];
  }
  return finish(tape, a.shape, std::move(out), {a.node, b.node}, [&] {
      return [](const double * g, const std::vector<std::vector<double> *> & p) {
               for (int s = 0; s < 2; ++s) {
                 if (p[static_cast<size_t>(s)] == nullptr) {continue;}
                 auto & dst = *p[static_cast<size_t>(s)];
                 for (size_t i = 0; i < dst.size(); ++i) {
                   dst[i] += g[i];
                 }
               }
             };
    });
}

Tensor sub(const Tensor & a, const Tensor & b)
{
  check_same_shape("sub", a, b);
  Tape * tape = common_tape({&a, &b});
  std::vector<double> out(a.data.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = a.data[i] - b.data[i];
  }
  return finish(tape, a.shape, std::move(out), {a.node, b.node}, [&] {
      return [](const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] != nullptr) {
                 for (size_t i = 0; i < p[0]->size(); ++i) {
                   (*p[0])[i] += g[i];
                 }
               }
               if (p[1] != nullptr) {
                 for (size_t i = 0; i < p[1]->size(); ++i) {
                   (*p[1])[i] -= g[i];
                 }
               }
             };
    });
}

Tensor mul(const Tensor & a, const Tensor & b)
{
  check_same_shape("mul", a, b);
  Tape * tape = common_tape({&a, &b});
  std::vector<double> out(a.data.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = a.data[i] * b.data[i];
  }
  return finish(tape, a.shape, std::move(out), {a.node, b.node}, [&] {
      std::vector<double> av = a.data;
      std::vector<double> bv = b.data;
      return [av = std::move(av), bv = std::move(bv)](
        const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] != nullptr) {
                 for (size_t i = 0; i < av.size(); ++i) {
                   (*p[0])[i] += g[i] * bv[i];
                 }
               }
               if (p[1] != nullptr) {
                 for (size_t i = 0; i < bv.size(); ++i) {
                   (*p[1])[i] += g[i] * av[i];
                 }
               }
             };
    });
}

Tensor broadcast_add(const Tensor & a, const Tensor & b)
{
  if (b.rank() > a.rank()) {
    throw ShapeError(
      "broadcast_add: " + shape_str(b.shape) + " has higher rank than " + shape_str(a.shape));
  }
  const size_t off = a.shape.size() - b.shape.size();
  for (size_t i = 0; i < b.shape.size(); ++i) {
    if (a.shape[off + i] != b.shape[i]) {
      throw ShapeError(
        "broadcast_add: trailing dims of " + shape_str(a.shape) + " do not match " +
        shape_str(b.shape));
    }
  }
  Tape * tape = common_tape({&a, &b});
  const size_t nb = b.data.size();
  const size_t rep = a.data.size() / nb;
  std::vector<double> out(a.data.size());
  for (size_t r = 0; r < rep; ++r) {
    for (size_t j = 0; j < nb; ++j) {
      out[r * nb + j] = a.data[r * nb + j] + b.data[j];
    }
  }
  return finish(tape, a.shape, std::move(out), {a.node, b.node}, [&] {
      return [rep, nb](const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] != nullptr) {
                 for (size_t i = 0; i < rep * nb; ++i) {
                   (*p[0])[i] += g[i];
                 }
               }
               if (p[1] != nullptr) {
                 for (size_t r = 0; r < rep; ++r) {
                   for (size_t j = 0; j < nb; ++j) {
                     (*p[1])[j] += g[r * nb + j];
                   }
                 }
               }
             };
    });
}

Tensor relu(const Tensor & a)
{
  Tape * tape = common_tape({&a});
  std::vector<double> out(a.data.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = a.data[i] > 0.0 ? a.data[i] : 0.0;
  }
  return finish(tape, a.shape, std::move(out), {a.node}, [&] {
      // subgradient at 0 is 0
      std::vector<char> mask(a.data.size());
      for (size_t i = 0; i < mask.size(); ++i) {
        mask[i] = a.data[i] > 0.0;
      }
      return [mask = std::move(mask)](
        const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (size_t i = 0; i < mask.size(); ++i) {
                 if (mask[i]) {(*p[0])[i] += g[i];}
               }
             };
    });
}

Tensor tanh_op(const Tensor & a)
{
  Tape * tape = common_tape({&a});
  std::vector<double> out(a.data.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = std::tanh(a.data[i]);
  }
  std::vector<double> saved = out;
  return finish(tape, a.shape, std::move(out), {a.node}, [&] {
      return [y = std::move(saved)](
        const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (size_t i = 0; i < y.size(); ++i) {
                 (*p[0])[i] += g[i] * (1.0 - y[i] * y[i]);
               }
             };
    });
}

Tensor sqrt_op(const Tensor & a)
{
  Tape * tape = common_tape({&a});
  std::vector<double> out(a.data.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = a.data[i] > 0.0 ? std::sqrt(a.data[i]) : 0.0;
  }
  std::vector<double> saved = out;
  return finish(tape, a.shape, std::move(out), {a.node}, [&] {
      return [y = std::move(saved)](
        const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (size_t i = 0; i < y.size(); ++i) {
                 if (y[i] > 0.0) {(*p[0])[i] += g[i] * 0.5 / y[i];}
               }
             };
    });
}

Tensor scale(const Tensor & a, double c)
{
  Tape * tape = common_tape({&a});
  std::vector<double> out(a.data.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = a.data[i] * c;
  }
  return finish(tape, a.shape, std::move(out), {a.node}, [&] {
      return [c](const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (size_t i = 0; i < p[0]->size(); ++i) {
                 (*p[0])[i] += g[i] * c;
               }
             };
    });
}

// --- Matmul -----------------------------------------------------------------

Tensor matmul(const Tensor & a, const Tensor & b)
{
  if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[0]) {
    throw ShapeError("matmul: shapes " + shape_str(a.shape) + " vs " + shape_str(b.shape));
  }
  const int64_t n = a.shape[0], k = a.shape[1], m = b.shape[1];
  Tape * tape = common_tape({&a, &b});
  std::vector<double> out(static_cast<size_t>(n * m), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t l = 0; l < k; ++l) {
      const double av = a.data[static_cast<size_t>(i * k + l)];
      const double * brow = &b.data[static_cast<size_t>(l * m)];
      double * orow = &out[static_cast<size_t>(i * m)];
      for (int64_t j = 0; j < m; ++j) {
        orow[j] += av * brow[j];
      }
    }
  }
  return finish(tape, {n, m}, std::move(out), {a.node, b.node}, [&] {
      std::vector<double> av = a.data;
      std::vector<double> bv = b.data;
      return [av = std::move(av), bv = std::move(bv), n, k, m](
        const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] != nullptr) {
                 // dA = g . B^T
                 auto & da = *p[0];
                 for (int64_t i = 0; i < n; ++i) {
                   for (int64_t l = 0; l < k; ++l) {
                     double acc = 0.0;
                     const double * grow = &g[i * m];
                     const double * brow = &bv[static_cast<size_t>(l * m)];
                     for (int64_t j = 0; j < m; ++j) {
                       acc += grow[j] * brow[j];
                     }
                     da[static_cast<size_t>(i * k + l)] += acc;
                   }
                 }
               }
               if (p[1] != nullptr) {
                 // dB = A^T . g
                 auto & db = *p[1];
                 for (int64_t i = 0; i < n; ++i) {
                   const double * arow = &av[static_cast<size_t>(i * k)];
                   const double * grow = &g[i * m];
                   for (int64_t l = 0; l < k; ++l) {
                     const double avil = arow[l];
                     double * drow = &db[static_cast<size_t>(l * m)];
                     for (int64_t j = 0; j < m; ++j) {
                       drow[j] += avil * grow[j];
                     }
                   }
                 }
               }
             };
    });
}

// --- Structure ops ----------------------------------------------------------

Tensor concat_last(const Tensor & a, const Tensor & b)
{
  if (a.rank() != b.rank() || a.rank() < 1) {
    throw ShapeError("concat_last: shapes " + shape_str(a.shape) + " vs " + shape_str(b.shape));
  }
  for (int i = 0; i + 1 < a.rank(); ++i) {
    if (a.shape[static_cast<size_t>(i)] != b.shape[static_cast<size_t>(i)]) {
      throw ShapeError("concat_last: shapes " + shape_str(a.shape) + " vs " + shape_str(b.shape));
    }
  }
  const int64_t la = a.shape.back(), lb = b.shape.back();
  const int64_t rows = a.numel() / la;
  std::vector<int64_t> shape = a.shape;
  shape.back() = la + lb;
  Tape * tape = common_tape({&a, &b});
  std::vector<double> out(static_cast<size_t>(rows * (la + lb)));
  for (int64_t r = 0; r < rows; ++r) {
    std::copy_n(&a.data[static_cast<size_t>(r * la)], la, &out[static_cast<size_t>(r * (la + lb))]);
    std::copy_n(
      &b.data[static_cast<size_t>(r * lb)], lb, &out[static_cast<size_t>(r * (la + lb) + la)]);
  }
  return finish(tape, std::move(shape), std::move(out), {a.node, b.node}, [&] {
      return [rows, la, lb](const double * g, const std::vector<std::vector<double> *> & p) {
               for (int64_t r = 0; r < rows; ++r) {
                 const double * grow = &g[r * (la + lb)];
                 if (p[0] != nullptr) {
                   for (int64_t j = 0; j < la; ++j) {
                     (*p[0])[static_cast<size_t>(r * la + j)] += grow[j];
                   }
                 }
                 if (p[1] != nullptr) {
                   for (int64_t j = 0; j < lb; ++j) {
                     (*p[1])[static_cast<size_t>(r * lb + j)] += grow[la + j];
                   }
                 }
               }
             };
    });
}

Tensor concat_rows(const Tensor & a, const Tensor & b)
{
  if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[1]) {
    throw ShapeError("concat_rows: shapes " + shape_str(a.shape) + " vs " + shape_str(b.shape));
  }
  const int64_t cols = a.shape[1];
  Tape * tape = common_tape({&a, &b});
  std::vector<double> out;
  out.reserve(a.data.size() + b.data.size());
  out.insert(out.end(), a.data.begin(), a.data.end());
  out.insert(out.end(), b.data.begin(), b.data.end());
  const size_t na = a.data.size();
  return finish(
    tape, {a.shape[0] + b.shape[0], cols}, std::move(out), {a.node, b.node}, [&] {
      return [na](const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] != nullptr) {
                 for (size_t i = 0; i < p[0]->size(); ++i) {
                   (*p[0])[i] += g[i];
                 }
               }
               if (p[1] != nullptr) {
                 for (size_t i = 0; i < p[1]->size(); ++i) {
                   (*p[1])[i] += g[na + i];
                 }
               }
             };
    });
}

Tensor reshape(const Tensor & a, std::vector<int64_t> new_shape)
{
  int64_t n = 1;
  for (int64_t d : new_shape) {
    n *= d;
  }
  if (n != a.numel()) {
    throw ShapeError(
      "reshape: " + shape_str(a.shape) + " has " + std::to_string(a.numel()) +
      " elements, target " + shape_str(new_shape));
  }
  Tape * tape = common_tape({&a});
  std::vector<double> out = a.data;
  return finish(tape, std::move(new_shape), std::move(out), {a.node}, [&] {
      return [](const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (size_t i = 0; i < p[0]->size(); ++i) {
                 (*p[0])[i] += g[i];
               }
             };
    });
}

Tensor gather_rows(const Tensor & a, const std::vector<int64_t> & idx)
{
  if (a.rank() != 2) {
    throw ShapeError("gather_rows: expected 2-D tensor, got " + shape_str(a.shape));
  }
  const int64_t n = a.shape[0], d = a.shape[1];
  for (int64_t i : idx) {
    if (i < 0 || i >= n) {
      throw ContractError(
        "gather_rows: index " + std::to_string(i) + " out of range [0," + std::to_string(n) + ")");
    }
  }
  Tape * tape = common_tape({&a});
  const int64_t rows = static_cast<int64_t>(idx.size());
  std::vector<double> out(static_cast<size_t>(rows * d));
  for (int64_t r = 0; r < rows; ++r) {
    std::copy_n(
      &a.data[static_cast<size_t>(idx[static_cast<size_t>(r)] * d)], d,
      &out[static_cast<size_t>(r * d)]);
  }
  return finish(tape, {rows, d}, std::move(out), {a.node}, [&] {
      std::vector<int64_t> saved = idx;
      return [saved = std::move(saved), d](
        const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (size_t r = 0; r < saved.size(); ++r) {
                 double * dst = &(*p[0])[static_cast<size_t>(saved[r] * d)];
                 const double * src = &g[static_cast<int64_t>(r) * d];
                 for (int64_t j = 0; j < d; ++j) {
                   dst[j] += src[j];
                 }
               }
             };
    });
}

// --- Softmax and reductions --------------------------------------------------

Tensor softmax_channelwise(const Tensor & logits)
{
  if (logits.rank() != 3) {
    throw ShapeError("softmax_channelwise: expected [N,K,D], got " + shape_str(logits.shape));
  }
  const int64_t n = logits.shape[0], k = logits.shape[1], d = logits.shape[2];
  Tape * tape = common_tape({&logits});
  std::vector<double> out(logits.data.size());
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t c = 0; c < d; ++c) {
      double mx = logits.data[static_cast<size_t>(i * k * d + c)];
      for (int64_t j = 1; j < k; ++j) {
        mx = std::max(mx, logits.data[static_cast<size_t>((i * k + j) * d + c)]);
      }
      double denom = 0.0;
      for (int64_t j = 0; j < k; ++j) {
        const double e = std::exp(logits.data[static_cast<size_t>((i * k + j) * d + c)] - mx);
        out[static_cast<size_t>((i * k + j) * d + c)] = e;
        denom += e;
      }
      for (int64_t j = 0; j < k; ++j) {
        out[static_cast<size_t>((i * k + j) * d + c)] /= denom;
      }
    }
  }
  std::vector<double> saved = out;
  return finish(tape, logits.shape, std::move(out), {logits.node}, [&] {
      return [y = std::move(saved), n, k, d](
        const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (int64_t i = 0; i < n; ++i) {
                 for (int64_t c = 0; c < d; ++c) {
                   double dot = 0.0;
                   for (int64_t j = 0; j < k; ++j) {
                     const size_t o = static_cast<size_t>((i * k + j) * d + c);
                     dot += g[o] * y[o];
                   }
                   for (int64_t j = 0; j < k; ++j) {
                     const size_t o = static_cast<size_t>((i * k + j) * d + c);
                     (*p[0])[o] += y[o] * (g[o] - dot);
                   }
                 }
               }
             };
    });
}

Tensor sum_mid(const Tensor & a)
{
  if (a.rank() != 3) {
    throw ShapeError("sum_mid: expected [N,K,D], got " + shape_str(a.shape));
  }
  const int64_t n = a.shape[0], k = a.shape[1], d = a.shape[2];
  Tape * tape = common_tape({&a});
  std::vector<double> out(static_cast<size_t>(n * d), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < k; ++j) {
      for (int64_t c = 0; c < d; ++c) {
        out[static_cast<size_t>(i * d + c)] += a.data[static_cast<size_t>((i * k + j) * d + c)];
      }
    }
  }
  return finish(tape, {n, d}, std::move(out), {a.node}, [&] {
      return [n, k, d](const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (int64_t i = 0; i < n; ++i) {
                 for (int64_t j = 0; j < k; ++j) {
                   for (int64_t c = 0; c < d; ++c) {
                     (*p[0])[static_cast<size_t>((i * k + j) * d + c)] += g[i * d + c];
                   }
                 }
               }
             };
    });
}

Tensor max_mid(const Tensor & a)
{
  if (a.rank() != 3) {
    throw ShapeError("max_mid: expected [N,K,D], got " + shape_str(a.shape));
  }
  const int64_t n = a.shape[0], k = a.shape[1], d = a.shape[2];
  Tape * tape = common_tape({&a});
  std::vector<double> out(static_cast<size_t>(n * d));
  std::vector<int64_t> arg(static_cast<size_t>(n * d), 0);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t c = 0; c < d; ++c) {
      double best = a.data[static_cast<size_t>(i * k * d + c)];
      int64_t bj = 0;
      for (int64_t j = 1; j < k; ++j) {
        const double v = a.data[static_cast<size_t>((i * k + j) * d + c)];
        if (v > best) {
          best = v;
          bj = j;
        }
      }
      out[static_cast<size_t>(i * d + c)] = best;
      arg[static_cast<size_t>(i * d + c)] = bj;
    }
  }
  return finish(tape, {n, d}, std::move(out), {a.node}, [&] {
      return [arg = std::move(arg), n, k, d](
        const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (int64_t i = 0; i < n; ++i) {
                 for (int64_t c = 0; c < d; ++c) {
                   const int64_t j = arg[static_cast<size_t>(i * d + c)];
                   (*p[0])[static_cast<size_t>((i * k + j) * d + c)] += g[i * d + c];
                 }
               }
             };
    });
}

Tensor max_rows(const Tensor & a)
{
  if (a.rank() != 2) {
    throw ShapeError("max_rows: expected 2-D tensor, got " + shape_str(a.shape));
  }
  const int64_t n = a.shape[0], d = a.shape[1];
  if (n < 1) {
    throw ContractError("max_rows: empty tensor");
  }
  Tape * tape = common_tape({&a});
  std::vector<double> out(static_cast<size_t>(d));
  std::vector<int64_t> arg(static_cast<size_t>(d), 0);
  for (int64_t c = 0; c < d; ++c) {
    double best = a.data[static_cast<size_t>(c)];
    int64_t bi = 0;
    for (int64_t i = 1; i < n; ++i) {
      const double v = a.data[static_cast<size_t>(i * d + c)];
      if (v > best) {
        best = v;
        bi = i;
      }
    }
    out[static_cast<size_t>(c)] = best;
    arg[static_cast<size_t>(c)] = bi;
  }
  return finish(tape, {1, d}, std::move(out), {a.node}, [&] {
      return [arg = std::move(arg), d](
        const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (int64_t c = 0; c < d; ++c) {
                 (*p[0])[static_cast<size_t>(arg[static_cast<size_t>(c)] * d + c)] += g[c];
               }
             };
    });
}

Tensor row_sum(const Tensor & a)
{
  if (a.rank() != 2) {
    throw ShapeError("row_sum: expected 2-D tensor, got " + shape_str(a.shape));
  }
  const int64_t n = a.shape[0], d = a.shape[1];
  Tape * tape = common_tape({&a});
  std::vector<double> out(static_cast<size_t>(n), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t c = 0; c < d; ++c) {
      out[static_cast<size_t>(i)] += a.data[static_cast<size_t>(i * d + c)];
    }
  }
  return finish(tape, {n, 1}, std::move(out), {a.node}, [&] {
      return [n, d](const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (int64_t i = 0; i < n; ++i) {
                 for (int64_t c = 0; c < d; ++c) {
                   (*p[0])[static_cast<size_t>(i * d + c)] += g[i];
                 }
               }
             };
    });
}

Tensor sum_all(const Tensor & a)
{
  Tape * tape = common_tape({&a});
  double acc = 0.0;
  for (double v : a.data) {
    acc += v;
  }
  return finish(tape, {1}, {acc}, {a.node}, [&] {
      return [](const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (auto & v : *p[0]) {
                 v += g[0];
               }
             };
    });
}

Tensor mean_all(const Tensor & a)
{
  if (a.numel() < 1) {
    throw ContractError("mean_all: empty tensor");
  }
  Tape * tape = common_tape({&a});
  double acc = 0.0;
  for (double v : a.data) {
    acc += v;
  }
  const double inv = 1.0 / static_cast<double>(a.numel());
  return finish(tape, {1}, {acc * inv}, {a.node}, [&] {
      return [inv](const double * g, const std::vector<std::vector<double> *> & p) {
               if (p[0] == nullptr) {return;}
               for (auto & v : *p[0]) {
                 v += g[0] * inv;
               }
             };
    });
}

}  // namespace pcc
