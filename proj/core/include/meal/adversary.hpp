#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "meal/network.hpp"
#include "meal/tape.hpp"
#include "meal/tensor.hpp"

namespace meal {

/// Three-layer fully-connected binary classifier: dense-relu-dense-relu-
/// dense-sigmoid, emitting one probability per row. Parameter names are
/// "<layer>.W" / "<layer>.b" for layer 0..2; inside a stack checkpoint they
/// are prefixed "disc.<j>.".
class Discriminator {
public:
    Discriminator() = default;

    /// Hidden widths default to [max(input/2,4), max(input/4,2)].
    static Discriminator init(std::size_t input_dim, std::uint64_t seed);
    static Discriminator init(std::size_t input_dim, std::array<std::size_t, 2> hidden,
                              std::uint64_t seed);
    static Discriminator from_params(std::size_t input_dim, ParamMap params);

    std::size_t input_dim() const { return input_dim_; }
    const ParamMap& params() const { return params_; }
    ParamMap& mutable_params() { return params_; }

    /// Classifies features [n x input_dim] into per-row probabilities
    /// [n x 1], each strictly inside (0,1). train_params controls whether the
    /// parameter leaves carry gradients on this tape.
    NodeId forward(Tape& tape, NodeId features, bool train_params,
                   TapeBinding* binding_out = nullptr) const;

private:
    std::size_t input_dim_ = 0;
    ParamMap params_;
};

/// mean log D(teacher) + mean log(1 - D(student)). Always <= 0; equals
/// -2 ln 2 for the constant D = 1/2. The discriminator maximizes this.
NodeId discriminator_objective(Tape& tape, const Discriminator& d, NodeId teacher_feats,
                               NodeId student_feats, bool train_params = true,
                               TapeBinding* binding_out = nullptr);

/// One discriminator per alignment entry.
struct DiscriminatorStack {
    std::vector<Discriminator> members;

    /// Stack parameters flattened under "disc.<j>." prefixes.
    ParamMap named_params() const;
};

struct GenAdvParts {
    NodeId total = 0;               // sum_j w_j * mean log(1 - D_j(s_j))
    std::vector<NodeId> per_block;  // unweighted per-member terms
};

/// The student's adversarial loss. Discriminator parameters are bound as
/// constants: gradients flow only into the student features. The default
/// saturating form minimizes log(1 - D); non_saturating switches to
/// -log D, an optional stability extension.
GenAdvParts generator_adv_loss(Tape& tape, const DiscriminatorStack& stack,
                               std::span<const NodeId> student_feats_per_block,
                               std::span<const double> block_weights,
                               bool non_saturating = false);

/// One gradient-ascent step on discriminator_objective w.r.t. the
/// discriminator parameters only. Features arrive as plain buffers, already
/// detached from any student graph.
void d_train_step(Discriminator& d, const Tensor& teacher_feats, const Tensor& student_feats,
                  double lr);

}  // namespace meal
