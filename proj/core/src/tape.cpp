#include "meal/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace meal {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

bool is_unary(Op tag) {
    switch (tag) {
        case Op::abs:
        case Op::square:
        case Op::log:
        case Op::log_clamped:
        case Op::negate:
        case Op::relu:
        case Op::sigmoid:
            return true;
        default:
            return false;
    }
}

bool is_binary(Op tag) { return tag == Op::add || tag == Op::sub || tag == Op::mul; }

double stable_sigmoid(double x) {
    double y;
    if (x >= 0.0) {
        y = 1.0 / (1.0 + std::exp(-x));
    } else {
        double e = std::exp(x);
        y = e / (1.0 + e);
    }
    // keep the output strictly inside (0,1) even in deep saturation
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - 1.1102230246251565e-16;  // nextafter(1,0)
    return std::min(std::max(y, lo), hi);
}

}  // namespace

const std::vector<double>& GradientMap::at(NodeId id) const {
    if (!contains(id)) throw std::out_of_range("gradient map: no gradient for node " + std::to_string(id));
    return grads_[id];
}

NodeId Tape::push(Node n) {
    n.id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
}

NodeId Tape::leaf(std::vector<double> data, Shape shape, bool requires_grad) {
    if (shape.rank() < 1) fail("leaf: rank must be >= 1");
    if (data.size() != shape.elements())
        fail("leaf: buffer length " + std::to_string(data.size()) + " does not match shape " +
             to_string(shape));
    Node n;
    n.shape = std::move(shape);
    n.data = std::move(data);
    n.op = Op::leaf;
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

NodeId Tape::leaf(const Tensor& t, bool requires_grad) { return leaf(t.data, t.shape, requires_grad); }

std::span<const double> Tape::value(NodeId id) const {
    const Node& n = node(id);
    return {n.data.data(), n.data.size()};
}

double Tape::scalar_value(NodeId id) const {
    const Node& n = node(id);
    if (n.shape.elements() != 1) fail("scalar_value: node has shape " + to_string(n.shape));
    return n.data[0];
}

NodeId Tape::elementwise(Op tag, NodeId a, std::optional<NodeId> b) {
    const Node& na = node(a);
    Node out;
    out.shape = na.shape;
    out.op = tag;
    out.parents = {a};
    out.requires_grad = na.requires_grad;
    out.data.resize(na.data.size());

    if (is_binary(tag)) {
        if (!b) fail("elementwise: binary op requires two operands");
        const Node& nb = node(*b);
        if (!(na.shape == nb.shape))
            fail("elementwise: shape mismatch " + to_string(na.shape) + " vs " + to_string(nb.shape));
        out.parents.push_back(*b);
        out.requires_grad = na.requires_grad || nb.requires_grad;
        const auto& x = na.data;
        const auto& y = nb.data;
        switch (tag) {
            case Op::add:
                for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = x[i] + y[i];
                break;
            case Op::sub:
                for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = x[i] - y[i];
                break;
            case Op::mul:
                for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = x[i] * y[i];
                break;
            default:
                fail("elementwise: unknown binary op");
        }
        return push(std::move(out));
    }

    if (!is_unary(tag)) fail("elementwise: op tag is not elementwise");
    if (b) fail("elementwise: unary op takes one operand");
    const auto& x = na.data;
    switch (tag) {
        case Op::abs:
            for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = std::abs(x[i]);
            break;
        case Op::square:
            for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = x[i] * x[i];
            break;
        case Op::log:
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (x[i] <= 0.0) fail("log: non-positive input " + std::to_string(x[i]));
                out.data[i] = std::log(x[i]);
            }
            break;
        case Op::log_clamped:
            for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = std::log(std::max(x[i], kLogFloor));
            break;
        case Op::negate:
            for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = -x[i];
            break;
        case Op::relu:
            for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = x[i] > 0.0 ? x[i] : 0.0;
            break;
        case Op::sigmoid:
            for (std::size_t i = 0; i < x.size(); ++i) out.data[i] = stable_sigmoid(x[i]);
            break;
        default:
            fail("elementwise: unknown unary op");
    }
    return push(std::move(out));
}

NodeId Tape::scale(NodeId a, double factor) {
    const Node& na = node(a);
    Node out;
    out.shape = na.shape;
    out.op = Op::scale;
    out.parents = {a};
    out.requires_grad = na.requires_grad;
    out.scalar = factor;
    out.data.resize(na.data.size());
    for (std::size_t i = 0; i < na.data.size(); ++i) out.data[i] = na.data[i] * factor;
    return push(std::move(out));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.shape.rank() != 2 || nb.shape.rank() != 2)
        fail("matmul: operands must be rank-2, got " + to_string(na.shape) + " and " + to_string(nb.shape));
    std::size_t m = na.shape.extent(0), k = na.shape.extent(1);
    std::size_t k2 = nb.shape.extent(0), n = nb.shape.extent(1);
    if (k != k2)
        fail("matmul: inner extents differ (" + std::to_string(k) + " vs " + std::to_string(k2) + ")");

    Node out;
    out.shape = Shape{m, n};
    out.op = Op::matmul;
    out.parents = {a, b};
    out.requires_grad = na.requires_grad || nb.requires_grad;
    out.data.assign(m * n, 0.0);
    const double* A = na.data.data();
    const double* B = nb.data.data();
    double* C = out.data.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            double aip = A[i * k + p];
            if (aip == 0.0) continue;
            const double* Bp = B + p * n;
            double* Ci = C + i * n;
            for (std::size_t j = 0; j < n; ++j) Ci[j] += aip * Bp[j];
        }
    }
    return push(std::move(out));
}

NodeId Tape::softmax(NodeId a) {
    const Node& na = node(a);
    if (na.shape.rank() != 2) fail("softmax: input must be rank-2, got " + to_string(na.shape));
    std::size_t n = na.shape.extent(0), c = na.shape.extent(1);
    if (c < 1) fail("softmax: class extent must be >= 1");

    Node out;
    out.shape = na.shape;
    out.op = Op::softmax;
    out.parents = {a};
    out.requires_grad = na.requires_grad;
    out.data.resize(n * c);
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = na.data.data() + i * c;
        double* y = out.data.data() + i * c;
        double mx = x[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, x[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            y[j] = std::exp(x[j] - mx);
            sum += y[j];
        }
        for (std::size_t j = 0; j < c; ++j) y[j] /= sum;
    }
    return push(std::move(out));
}

namespace {

// outer x axis x inner decomposition for single-axis walks
struct AxisSplit {
    std::size_t outer = 1, axis = 1, inner = 1;
};

AxisSplit split_axes(const Shape& s, std::size_t axis) {
    AxisSplit r;
    for (std::size_t i = 0; i < axis; ++i) r.outer *= s.extent(i);
    r.axis = s.extent(axis);
    for (std::size_t i = axis + 1; i < s.rank(); ++i) r.inner *= s.extent(i);
    return r;
}

Shape drop_axis(const Shape& s, std::size_t axis) {
    std::vector<std::size_t> dims;
    for (std::size_t i = 0; i < s.rank(); ++i)
        if (i != axis) dims.push_back(s.extent(i));
    if (dims.empty()) dims.push_back(1);  // scalars are rank-1 extent-1
    return Shape(std::move(dims));
}

}  // namespace

NodeId Tape::reduce_sum(NodeId a, std::optional<std::size_t> axis) {
    const Node& na = node(a);
    Node out;
    out.op = Op::reduce_sum;
    out.parents = {a};
    out.requires_grad = na.requires_grad;
    if (!axis) {
        out.axis = -1;
        out.shape = Shape{1};
        double s = 0.0;
        for (double v : na.data) s += v;
        out.data = {s};
        return push(std::move(out));
    }
    if (*axis >= na.shape.rank()) fail("reduce: axis " + std::to_string(*axis) + " out of range for " + to_string(na.shape));
    out.axis = static_cast<int>(*axis);
    out.shape = drop_axis(na.shape, *axis);
    auto sp = split_axes(na.shape, *axis);
    out.data.assign(sp.outer * sp.inner, 0.0);
    for (std::size_t o = 0; o < sp.outer; ++o)
        for (std::size_t x = 0; x < sp.axis; ++x)
            for (std::size_t in = 0; in < sp.inner; ++in)
                out.data[o * sp.inner + in] += na.data[(o * sp.axis + x) * sp.inner + in];
    return push(std::move(out));
}

NodeId Tape::reduce_mean(NodeId a, std::optional<std::size_t> axis) {
    const Node& na = node(a);
    std::size_t count = axis ? (*axis < na.shape.rank() ? na.shape.extent(*axis) : 0)
                             : na.shape.elements();
    if (axis && *axis >= na.shape.rank())
        fail("reduce: axis " + std::to_string(*axis) + " out of range for " + to_string(na.shape));
    if (count == 0) fail("reduce_mean: mean over an empty extent");
    NodeId summed = reduce_sum(a, axis);
    // rewrite in place as a mean so backward divides once
    Node& n = nodes_[summed];
    n.op = Op::reduce_mean;
    for (double& v : n.data) v /= static_cast<double>(count);
    return summed;
}

NodeId Tape::concat(std::span<const NodeId> parts, std::size_t axis) {
    if (parts.empty()) fail("concat: no operands");
    const Node& first = node(parts[0]);
    if (axis >= first.shape.rank()) fail("concat: axis " + std::to_string(axis) + " out of range");

    std::size_t total_axis = 0;
    bool rg = false;
    for (NodeId p : parts) {
        const Node& np = node(p);
        if (np.shape.rank() != first.shape.rank())
            fail("concat: rank mismatch " + to_string(np.shape) + " vs " + to_string(first.shape));
        for (std::size_t i = 0; i < first.shape.rank(); ++i)
            if (i != axis && np.shape.extent(i) != first.shape.extent(i))
                fail("concat: incompatible shapes " + to_string(np.shape) + " vs " + to_string(first.shape));
        total_axis += np.shape.extent(axis);
        rg = rg || np.requires_grad;
    }

    Node out;
    out.op = Op::concat;
    out.axis = static_cast<int>(axis);
    out.parents.assign(parts.begin(), parts.end());
    out.requires_grad = rg;
    std::vector<std::size_t> dims = first.shape.dims;
    dims[axis] = total_axis;
    out.shape = Shape(std::move(dims));
    out.data.resize(out.shape.elements());

    auto sp = split_axes(out.shape, axis);
    std::size_t axis_offset = 0;
    for (NodeId p : parts) {
        const Node& np = node(p);
        std::size_t e = np.shape.extent(axis);
        for (std::size_t o = 0; o < sp.outer; ++o)
            for (std::size_t x = 0; x < e; ++x)
                std::copy_n(np.data.data() + (o * e + x) * sp.inner, sp.inner,
                            out.data.data() + (o * sp.axis + axis_offset + x) * sp.inner);
        axis_offset += e;
    }
    return push(std::move(out));
}

NodeId Tape::adaptive_pool(NodeId a, std::size_t target, PoolMode mode) {
    const Node& na = node(a);
    if (na.shape.rank() != 2) fail("adaptive_pool: input must be rank-2 [n x L]");
    if (target == 0) fail("adaptive_pool: target length must be >= 1");
    std::size_t n = na.shape.extent(0), L = na.shape.extent(1), O = target;
    if (L == 0) fail("adaptive_pool: input length must be >= 1");

    Node out;
    out.op = mode == PoolMode::avg ? Op::adaptive_avg_pool : Op::adaptive_max_pool;
    out.parents = {a};
    out.requires_grad = na.requires_grad;
    out.pool_target = O;
    out.shape = Shape{n, O};
    out.data.resize(n * O);
    if (mode == PoolMode::max) out.arg_index.resize(n * O);

    for (std::size_t r = 0; r < n; ++r) {
        const double* x = na.data.data() + r * L;
        for (std::size_t i = 0; i < O; ++i) {
            std::size_t start = (i * L) / O;
            std::size_t end = ((i + 1) * L + O - 1) / O;  // ceil
            if (mode == PoolMode::avg) {
                double s = 0.0;
                for (std::size_t j = start; j < end; ++j) s += x[j];
                out.data[r * O + i] = s / static_cast<double>(end - start);
            } else {
                std::size_t best = start;
                for (std::size_t j = start + 1; j < end; ++j)
                    if (x[j] > x[best]) best = j;  // ties keep the lowest index
                out.data[r * O + i] = x[best];
                out.arg_index[r * O + i] = static_cast<std::uint32_t>(best);
            }
        }
    }
    return push(std::move(out));
}

GradientMap Tape::backward(NodeId root) const {
    const Node& r = node(root);
    if (r.shape.elements() != 1) fail("backward: root must be scalar, got shape " + to_string(r.shape));

    std::vector<std::vector<double>> grads(nodes_.size());
    if (!r.requires_grad) return GradientMap(std::move(grads));
    grads[root] = {1.0};

    auto accum = [&](NodeId parent, auto&& fn) {
        const Node& p = nodes_[parent];
        if (!p.requires_grad) return;
        auto& g = grads[parent];
        if (g.empty()) g.assign(p.data.size(), 0.0);
        fn(g);
    };

    for (NodeId id = root + 1; id-- > 0;) {
        const Node& n = nodes_[id];
        if (grads[id].empty() || n.op == Op::leaf) continue;
        const std::vector<double>& g = grads[id];

        switch (n.op) {
            case Op::add:
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                });
                accum(n.parents[1], [&](auto& gb) {
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                });
                break;
            case Op::sub:
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                });
                accum(n.parents[1], [&](auto& gb) {
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                });
                break;
            case Op::mul: {
                const auto& xa = nodes_[n.parents[0]].data;
                const auto& xb = nodes_[n.parents[1]].data;
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * xb[i];
                });
                accum(n.parents[1], [&](auto& gb) {
                    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * xa[i];
                });
                break;
            }
            case Op::abs: {
                const auto& x = nodes_[n.parents[0]].data;
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t i = 0; i < g.size(); ++i)
                        ga[i] += x[i] > 0.0 ? g[i] : (x[i] < 0.0 ? -g[i] : 0.0);
                });
                break;
            }
            case Op::square: {
                const auto& x = nodes_[n.parents[0]].data;
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * 2.0 * x[i];
                });
                break;
            }
            case Op::log: {
                const auto& x = nodes_[n.parents[0]].data;
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / x[i];
                });
                break;
            }
            case Op::log_clamped: {
                const auto& x = nodes_[n.parents[0]].data;
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t i = 0; i < g.size(); ++i)
                        if (x[i] > kLogFloor) ga[i] += g[i] / x[i];
                });
                break;
            }
            case Op::negate:
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
                });
                break;
            case Op::relu: {
                const auto& x = nodes_[n.parents[0]].data;
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t i = 0; i < g.size(); ++i)
                        if (x[i] > 0.0) ga[i] += g[i];
                });
                break;
            }
            case Op::sigmoid: {
                const auto& y = n.data;
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
                });
                break;
            }
            case Op::scale:
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * n.scalar;
                });
                break;
            case Op::matmul: {
                const Node& na = nodes_[n.parents[0]];
                const Node& nb = nodes_[n.parents[1]];
                std::size_t m = na.shape.extent(0), k = na.shape.extent(1), w = nb.shape.extent(1);
                accum(n.parents[0], [&](auto& ga) {
                    // dA = G * B^T
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t p = 0; p < k; ++p) {
                            double s = 0.0;
                            for (std::size_t j = 0; j < w; ++j) s += g[i * w + j] * nb.data[p * w + j];
                            ga[i * k + p] += s;
                        }
                });
                accum(n.parents[1], [&](auto& gb) {
                    // dB = A^T * G
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t p = 0; p < k; ++p) {
                            double aip = na.data[i * k + p];
                            if (aip == 0.0) continue;
                            for (std::size_t j = 0; j < w; ++j) gb[p * w + j] += aip * g[i * w + j];
                        }
                });
                break;
            }
            case Op::softmax: {
                std::size_t rows = n.shape.extent(0), c = n.shape.extent(1);
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t i = 0; i < rows; ++i) {
                        const double* y = n.data.data() + i * c;
                        const double* gi = g.data() + i * c;
                        double dot = 0.0;
                        for (std::size_t j = 0; j < c; ++j) dot += gi[j] * y[j];
                        for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += y[j] * (gi[j] - dot);
                    }
                });
                break;
            }
            case Op::reduce_sum:
            case Op::reduce_mean: {
                const Node& p = nodes_[n.parents[0]];
                if (n.axis < 0) {
                    double factor = n.op == Op::reduce_mean
                                        ? 1.0 / static_cast<double>(p.shape.elements())
                                        : 1.0;
                    accum(n.parents[0], [&](auto& ga) {
                        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0] * factor;
                    });
                } else {
                    auto sp = split_axes(p.shape, static_cast<std::size_t>(n.axis));
                    double factor =
                        n.op == Op::reduce_mean ? 1.0 / static_cast<double>(sp.axis) : 1.0;
                    accum(n.parents[0], [&](auto& ga) {
                        for (std::size_t o = 0; o < sp.outer; ++o)
                            for (std::size_t x = 0; x < sp.axis; ++x)
                                for (std::size_t in = 0; in < sp.inner; ++in)
                                    ga[(o * sp.axis + x) * sp.inner + in] +=
                                        g[o * sp.inner + in] * factor;
                    });
                }
                break;
            }
            case Op::concat: {
                auto axis = static_cast<std::size_t>(n.axis);
                auto sp = split_axes(n.shape, axis);
                std::size_t axis_offset = 0;
                for (NodeId pid : n.parents) {
                    const Node& p = nodes_[pid];
                    std::size_t e = p.shape.extent(axis);
                    std::size_t off = axis_offset;
                    accum(pid, [&](auto& gp) {
                        for (std::size_t o = 0; o < sp.outer; ++o)
                            for (std::size_t x = 0; x < e; ++x)
                                for (std::size_t in = 0; in < sp.inner; ++in)
                                    gp[(o * e + x) * sp.inner + in] +=
                                        g[(o * sp.axis + off + x) * sp.inner + in];
                    });
                    axis_offset += e;
                }
                break;
            }
            case Op::adaptive_avg_pool: {
                const Node& p = nodes_[n.parents[0]];
                std::size_t L = p.shape.extent(1), O = n.pool_target, rows = n.shape.extent(0);
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t i = 0; i < O; ++i) {
                            std::size_t start = (i * L) / O;
                            std::size_t end = ((i + 1) * L + O - 1) / O;
                            double share = g[r * O + i] / static_cast<double>(end - start);
                            for (std::size_t j = start; j < end; ++j) ga[r * L + j] += share;
                        }
                });
                break;
            }
            case Op::adaptive_max_pool: {
                const Node& p = nodes_[n.parents[0]];
                std::size_t L = p.shape.extent(1), O = n.pool_target, rows = n.shape.extent(0);
                accum(n.parents[0], [&](auto& ga) {
                    for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t i = 0; i < O; ++i)
                            ga[r * L + n.arg_index[r * O + i]] += g[r * O + i];
                });
                break;
            }
            case Op::leaf:
                break;
        }
    }

    // keep buffers only for requires_grad nodes (true by construction) —
    // intermediate buffers stay, which is fine: callers look up leaves.
    return GradientMap(std::move(grads));
}

double grad_check(const GraphBuilder& build, std::span<const Tensor> points, double eps) {
    // analytic pass
    Tape tape;
    std::vector<NodeId> inputs;
    inputs.reserve(points.size());
    for (const Tensor& t : points) inputs.push_back(tape.leaf(t, true));
    NodeId root = build(tape, inputs);
    if (tape.node(root).shape.elements() != 1)
        throw std::invalid_argument("grad_check: builder must yield a scalar root");
    GradientMap grads = tape.backward(root);

    auto eval_at = [&](std::size_t which, std::size_t coord, double delta) {
        std::vector<Tensor> shifted(points.begin(), points.end());
        shifted[which].data[coord] += delta;
        Tape t2;
        std::vector<NodeId> in2;
        for (const Tensor& t : shifted) in2.push_back(t2.leaf(t, false));
        return t2.scalar_value(build(t2, in2));
    };

    double max_rel = 0.0;
    for (std::size_t w = 0; w < points.size(); ++w) {
        const std::vector<double>* g = grads.find(inputs[w]);
        for (std::size_t c = 0; c < points[w].data.size(); ++c) {
            double analytic = g ? (*g)[c] : 0.0;
            double numeric = (eval_at(w, c, eps) - eval_at(w, c, -eps)) / (2.0 * eps);
            double rel = std::abs(analytic - numeric) /
                         std::max(1e-8, std::abs(analytic) + std::abs(numeric));
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

double grad_check(const std::function<NodeId(Tape&, NodeId)>& build, const Tensor& point,
                  double eps) {
    std::vector<Tensor> pts{point};
    return grad_check(
        [&](Tape& t, std::span<const NodeId> in) { return build(t, in[0]); }, pts, eps);
}

}  // namespace meal
