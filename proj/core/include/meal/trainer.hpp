#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "meal/adversary.hpp"
#include "meal/data.hpp"
#include "meal/distill.hpp"
#include "meal/network.hpp"
#include "meal/rng.hpp"

namespace meal {

class MetricsSink;

/// SGD with momentum: v <- momentum*v + g; p <- p - lr*v.
struct OptimizerState {
    double lr = 0.05;
    double momentum = 0.9;
    ParamMap velocity;  // lazily created, shapes mirror the parameters
};

void sgd_step(ParamMap& params, const ParamMap& grads, OptimizerState& state);

/// Ordered collection of frozen, pretrained teachers.
struct TeacherZoo {
    std::vector<BlockNetwork> teachers;
    std::vector<std::string> names;

    std::size_t size() const { return teachers.size(); }
};

/// Uniform choice of a teacher index, deterministic under a seeded rng.
std::size_t select_teacher(const TeacherZoo& zoo, Rng& rng);

struct MealConfig {
    double alpha = 1.0;  // similarity weight
    double beta = 1.0;   // adversarial weight
    SimilarityMetric metric = SimilarityMetric::ce;
    AlignmentConfig alignment;  // block_set empty = all student blocks
    std::size_t iterations = 2400;
    std::size_t batch_size = 32;
    double student_lr = 0.05;
    double disc_lr = 0.01;
    double momentum = 0.9;
    bool cosine_lr = true;  // student lr decays to 0 over the run
    std::size_t d_steps_per_g_step = 1;
    std::uint64_t seed = 0;
    bool use_adversary = true;
    bool use_intermediate = true;
    bool weights_apply_to_gan = true;   // block coefficients also scale GAN terms
    bool non_saturating_gen = false;    // -log D instead of log(1 - D)
    bool best_by_test = true;           // return best-by-test-error snapshot

    bool operator==(const MealConfig&) const = default;
};

/// Alignment set actually trained: the configured set, or all blocks when
/// unset, collapsed to the final entry when use_intermediate is off.
AlignmentConfig effective_alignment(const MealConfig& cfg, const NetworkSpec& student_spec);

struct MetricsRecord {
    std::size_t iteration = 0;
    std::size_t teacher_index = 0;
    std::vector<double> sim_per_block;  // unweighted, one per alignment entry
    std::vector<double> gan_per_block;
    double total_loss = 0.0;  // alpha * sum w*sim + beta * sum w*gan
    double train_error = 0.0;
    double test_error = 0.0;
};

/// One MEAL step: pick a teacher, run teacher (eval) and student (train) on
/// the same batch, take d_steps_per_g_step ascent steps per discriminator on
/// detached features, then descend the student on
/// alpha * L_sim + beta * L_gan. Teacher bytes never change.
MetricsRecord meal_iteration(BlockNetwork& student, const TeacherZoo& zoo,
                             DiscriminatorStack& stack, const Tensor& batch_features,
                             const MealConfig& cfg, double lr_now, Rng& select_rng,
                             Rng& dropout_rng, OptimizerState& opt);

struct MealResult {
    BlockNetwork student;
    DiscriminatorStack stack;
    std::vector<MetricsRecord> metrics;  // one per iteration
    std::size_t best_iteration = 0;
    double best_test_error = 1.0;
    double final_test_error = 1.0;
};

/// Full MEAL run over shuffled mini-batches. Test error is evaluated at
/// epoch boundaries; records carry the most recent evaluation. The returned
/// student is the best-by-test-error snapshot (or the final iterate when
/// cfg.best_by_test is off).
MealResult meal_train(const NetworkSpec& student_spec, const TeacherZoo& zoo,
                      const Dataset& train, const Dataset& test, const MealConfig& cfg,
                      MetricsSink* sink = nullptr);

struct PretrainOptions {
    std::size_t epochs = 300;
    double lr = 0.1;
    double momentum = 0.9;
    std::size_t batch_size = 32;
    bool cosine_lr = true;

    bool operator==(const PretrainOptions&) const = default;
};

struct PretrainResult {
    BlockNetwork net;  // frozen
    std::vector<double> epoch_losses;
};

/// Stage-1 teacher training: one-hot cross-entropy against ground-truth
/// labels by mini-batch SGD. The returned network is frozen.
PretrainResult pretrain_teacher(const NetworkSpec& spec, const Dataset& train,
                                const PretrainOptions& opts);

/// Per-example mean of teacher probability rows, argmax, error rate.
double traditional_ensemble_error(const TeacherZoo& zoo, const Dataset& dataset);

struct AblationRow {
    std::string name;
    std::vector<double> errors;  // one test error per seed
    double mean = 0.0;
    double stddev = 0.0;  // population stddev; 0 for a single seed
};

/// Runs the standard ablation grid: a base model trained on ground-truth
/// labels, then {l1}, {l2}, {ce}, {ce+int}, {l2+int}, {ce+int+adv},
/// {l1+int+adv}, each over every seed. The zoo is shared across rows so rows
/// differ only in the student-side configuration.
std::vector<AblationRow> run_ablation(const Dataset& train, const Dataset& test,
                                      const NetworkSpec& base_spec, const TeacherZoo& zoo,
                                      const MealConfig& base_cfg,
                                      const PretrainOptions& base_opts,
                                      std::span<const std::uint64_t> seeds);

}  // namespace meal
