#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "meal/tensor.hpp"

namespace meal {

enum class Op : std::uint8_t {
    leaf,
    add,
    sub,
    mul,
    abs,
    square,
    log,
    log_clamped,
    negate,
    relu,
    sigmoid,
    scale,
    matmul,
    softmax,
    reduce_sum,
    reduce_mean,
    concat,
    adaptive_avg_pool,
    adaptive_max_pool,
};

enum class PoolMode : std::uint8_t { avg, max };

using NodeId = std::uint32_t;

/// Inputs to losses that can underflow to zero are clamped here before log.
inline constexpr double kLogFloor = 1e-12;

/// One value in the computation graph. Immutable once created: parameters
/// are updated by writing fresh leaves on the next tape, never by touching
/// recorded history.
struct Node {
    NodeId id = 0;
    Shape shape{};
    std::vector<double> data;
    Op op = Op::leaf;
    std::vector<NodeId> parents;
    bool requires_grad = false;

    // op metadata
    int axis = -1;                          // reduce (-1 = all axes) / concat
    double scalar = 0.0;                    // scale factor
    std::size_t pool_target = 0;            // adaptive pool output length
    std::vector<std::uint32_t> arg_index;   // max-pool argmax per output cell
};

/// Gradients keyed by node id, produced by Tape::backward. Absent entries
/// mean the node was unreachable from the root or does not require grad.
class GradientMap {
public:
    explicit GradientMap(std::vector<std::vector<double>> grads) : grads_(std::move(grads)) {}

    bool contains(NodeId id) const { return id < grads_.size() && !grads_[id].empty(); }
    const std::vector<double>* find(NodeId id) const {
        return contains(id) ? &grads_[id] : nullptr;
    }
    /// Throws if the node has no gradient.
    const std::vector<double>& at(NodeId id) const;

private:
    std::vector<std::vector<double>> grads_;
};

/// Append-only record of a forward computation. Values are computed eagerly
/// as ops are pushed; backward replays the record in reverse creation order,
/// which is already a reverse topological order since parents precede
/// children by construction.
///
/// A tape and its nodes form a single-owner unit; distinct tapes are
/// independent and may run on different threads.
class Tape {
public:
    NodeId leaf(std::vector<double> data, Shape shape, bool requires_grad);
    NodeId leaf(const Tensor& t, bool requires_grad);
    NodeId constant(const Tensor& t) { return leaf(t, false); }

    /// Generic entry point for the elementwise family. Binary tags require b.
    NodeId elementwise(Op tag, NodeId a, std::optional<NodeId> b = std::nullopt);

    NodeId add(NodeId a, NodeId b) { return elementwise(Op::add, a, b); }
    NodeId sub(NodeId a, NodeId b) { return elementwise(Op::sub, a, b); }
    NodeId mul(NodeId a, NodeId b) { return elementwise(Op::mul, a, b); }
    NodeId abs(NodeId a) { return elementwise(Op::abs, a); }
    NodeId square(NodeId a) { return elementwise(Op::square, a); }
    NodeId log(NodeId a) { return elementwise(Op::log, a); }
    NodeId log_clamped(NodeId a) { return elementwise(Op::log_clamped, a); }
    NodeId negate(NodeId a) { return elementwise(Op::negate, a); }
    NodeId relu(NodeId a) { return elementwise(Op::relu, a); }
    NodeId sigmoid(NodeId a) { return elementwise(Op::sigmoid, a); }

    /// Multiplies every element by a fixed scalar constant.
    NodeId scale(NodeId a, double factor);

    NodeId matmul(NodeId a, NodeId b);

    /// Row-wise softmax of a rank-2 [n x c] node, max-subtracted for
    /// stability. Rows sum to 1 within 1e-12.
    NodeId softmax(NodeId a);

    NodeId reduce_sum(NodeId a, std::optional<std::size_t> axis = std::nullopt);
    NodeId reduce_mean(NodeId a, std::optional<std::size_t> axis = std::nullopt);

    NodeId concat(std::span<const NodeId> parts, std::size_t axis);

    /// Pools each row of a rank-2 [n x L] node to length `target`. Output
    /// column i pools the input bin [floor(i*L/O), ceil((i+1)*L/O)). Average
    /// pooling distributes gradient uniformly over the bin; max pooling
    /// routes it to the argmax position, ties broken toward the lowest index.
    NodeId adaptive_pool(NodeId a, std::size_t target, PoolMode mode);

    const Node& node(NodeId id) const { return nodes_.at(id); }
    std::span<const double> value(NodeId id) const;
    /// Value of a scalar (single-element) node.
    double scalar_value(NodeId id) const;
    std::size_t size() const { return nodes_.size(); }

    /// Reverse-mode accumulation from a scalar root. Deterministic: the same
    /// graph yields bitwise-identical gradients on every run.
    GradientMap backward(NodeId root) const;

private:
    NodeId push(Node n);
    std::vector<Node> nodes_;
};

/// Builds a scalar-rooted graph over leaves created from `points`; the
/// leaves are handed to the builder in order.
using GraphBuilder = std::function<NodeId(Tape&, std::span<const NodeId>)>;

/// Compares analytic gradients of every coordinate of every input against
/// central finite differences. Returns the max over coordinates of
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|). The builder must
/// be a pure function of the leaf values.
double grad_check(const GraphBuilder& build, std::span<const Tensor> points, double eps = 1e-5);

/// Single-input convenience over the general form.
double grad_check(const std::function<NodeId(Tape&, NodeId)>& build, const Tensor& point,
                  double eps = 1e-5);

}  // namespace meal
