#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "meal/rng.hpp"
#include "meal/tape.hpp"
#include "meal/tensor.hpp"

namespace meal {

struct Dataset;

enum class Activation : std::uint8_t { relu };

/// One block: a run of dense layers whose last activation is exposed for
/// alignment. layer_widths are the output widths of each layer in order.
struct BlockSpec {
    std::vector<std::size_t> layer_widths;
    Activation activation = Activation::relu;
    double dropout_p = 0.0;

    bool operator==(const BlockSpec&) const = default;
};

struct NetworkSpec {
    std::size_t input_dim = 0;
    std::vector<BlockSpec> blocks;
    std::size_t num_classes = 0;
    std::uint64_t seed = 0;

    bool operator==(const NetworkSpec&) const = default;
};

/// Throws std::invalid_argument on inconsistent widths or out-of-range
/// dropout probabilities.
void validate(const NetworkSpec& spec);

/// Graph handles produced by one forward pass.
struct ForwardResult {
    std::vector<NodeId> block_outputs;  // last-layer activation per block
    NodeId logits = 0;
    NodeId probabilities = 0;  // softmax(logits)
};

/// Leaf ids of bound parameters, in canonical (name-sorted) order.
struct TapeBinding {
    std::vector<std::pair<std::string, NodeId>> params;

    NodeId node(std::string_view name) const;
};

TapeBinding bind_params(Tape& tape, const ParamMap& params, bool requires_grad);

/// Pure graph construction from an explicit binding. Exposed separately from
/// BlockNetwork::forward so gradient checks can substitute their own leaves.
ForwardResult forward_graph(Tape& tape, const NetworkSpec& spec, const TapeBinding& binding,
                            const Tensor& batch, bool train_mode, Rng* dropout_rng = nullptr);

/// Canonical parameter names: "block<i>.<j>.W" / "block<i>.<j>.b" for layer j
/// of block i, plus "head.W" / "head.b" for the classifier layer. Biases are
/// stored rank-2 as [1 x width].
class BlockNetwork {
public:
    BlockNetwork() = default;

    /// Weights from a zero-mean uniform law with half-width 1/sqrt(fan_in),
    /// biases zero, deterministic for a given spec seed.
    static BlockNetwork init(const NetworkSpec& spec);

    /// Adopts existing parameters (checkpoint load path). Shapes are
    /// validated against the spec.
    static BlockNetwork from_params(NetworkSpec spec, ParamMap params);

    const NetworkSpec& spec() const { return spec_; }
    const ParamMap& params() const { return params_; }
    bool frozen() const { return frozen_; }
    void freeze() { frozen_ = true; }

    /// Write access for optimizers. Throws std::logic_error on a frozen
    /// network: frozen parameters never receive updates.
    ParamMap& mutable_params();

    /// Binds parameters as tape leaves (gradients enabled only when
    /// train_mode is set and the network is not frozen) and builds the
    /// forward graph. Dropout applies only in train mode with dropout_p > 0,
    /// scaling kept activations by 1/(1-p).
    ForwardResult forward(Tape& tape, const Tensor& batch, bool train_mode,
                          Rng* dropout_rng = nullptr, TapeBinding* binding_out = nullptr) const;

    /// Row-wise argmax of eval-mode probabilities; ties break to the lowest
    /// class index.
    std::vector<std::size_t> predict_classes(const Tensor& batch) const;

    /// Fraction of examples whose predicted class differs from the label.
    double error_rate(const Dataset& dataset) const;

private:
    NetworkSpec spec_;
    ParamMap params_;
    bool frozen_ = false;
};

/// Reconstructs the architecture from checkpoint parameter names and shapes.
/// Entries not named "block*" or "head.*" (e.g. "disc.*") are ignored.
NetworkSpec spec_from_params(const ParamMap& params);

/// Loads a network from a flat checkpoint map via spec_from_params.
BlockNetwork network_from_params(const ParamMap& params);

}  // namespace meal
