#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "meal/network.hpp"
#include "meal/tape.hpp"

namespace meal {

enum class SimilarityMetric : std::uint8_t { l1, l2, kl, ce };

/// Which blocks are aligned and how. The last entry of block_set always
/// denotes the final probability output; earlier entries compare adaptively
/// pooled block activations.
struct AlignmentConfig {
    std::vector<std::size_t> block_set;  // empty = all blocks of the student
    PoolMode pool_mode = PoolMode::avg;
    std::vector<double> block_weights;

    bool operator==(const AlignmentConfig&) const = default;
};

void validate(const AlignmentConfig& cfg, std::size_t num_blocks);

/// Per-batch distance between teacher and student rows, averaged over the
/// batch dimension n:
///   l1 = (1/n) sum |T - S|
///   l2 = (1/n) sum (T - S)^2
///   kl = (1/n) sum T * log(T / S)   (>= 0; 0*log 0 reads as 0)
///   ce = -(1/n) sum T * log S
/// kl and ce require both inputs to be probability rows. Logs are clamped at
/// 1e-12 so vanishing probabilities cannot produce infinities.
NodeId sim_distance(Tape& tape, SimilarityMetric metric, NodeId teacher_out, NodeId student_out);

/// Pools both feature maps to [n x target_len] and applies sim_distance.
/// Intermediate features are not distributions, so kl/ce first pass the
/// pooled rows through a softmax; l1/l2 use them raw.
NodeId aligned_block_loss(Tape& tape, SimilarityMetric metric, NodeId teacher_block,
                          NodeId student_block, PoolMode pool_mode, std::size_t target_len);

/// One aligned teacher/student pair per entry of the alignment set. Pooled
/// to the student's block width for intermediate entries; the probability
/// outputs for the final entry. The same features feed both the similarity
/// loss and the discriminator stack.
struct AlignedPair {
    NodeId teacher = 0;
    NodeId student = 0;
    std::size_t width = 0;
    bool is_final = false;
};

std::vector<AlignedPair> align_features(Tape& tape, const ForwardResult& teacher,
                                        const ForwardResult& student, const AlignmentConfig& cfg,
                                        const NetworkSpec& student_spec);

struct SimLossParts {
    NodeId total = 0;                // sum_j w_j * L_j
    std::vector<NodeId> per_block;   // unweighted L_j per alignment entry
};

/// Block-weighted sum of per-entry similarity losses over the alignment set.
SimLossParts total_sim_loss(Tape& tape, SimilarityMetric metric, const ForwardResult& teacher,
                            const ForwardResult& student, const AlignmentConfig& cfg,
                            const NetworkSpec& student_spec);

/// Variant over precomputed aligned pairs, so callers sharing features with
/// the adversary do not pool twice.
SimLossParts total_sim_loss(Tape& tape, SimilarityMetric metric,
                            std::span<const AlignedPair> pairs,
                            std::span<const double> block_weights);

/// Mean one-hot cross-entropy against integer labels; the teacher
/// pretraining objective.
NodeId one_hot_ce(Tape& tape, NodeId probabilities, std::span<const int> labels);

const char* to_string(SimilarityMetric m);
SimilarityMetric metric_from_string(std::string_view name);

}  // namespace meal
