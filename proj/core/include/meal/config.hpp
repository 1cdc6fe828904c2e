#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meal/data.hpp"
#include "meal/network.hpp"
#include "meal/trainer.hpp"

namespace meal {

struct OutputOptions {
    std::string dir = "out";

    bool operator==(const OutputOptions&) const = default;
};

/// Full experiment description. One master seed feeds every stage through
/// named sub-streams; explicit per-section seeds in the document override
/// the derived defaults.
struct ExperimentConfig {
    std::uint64_t seed = 7;
    SyntheticSpec data;
    NetworkSpec student;
    std::vector<NetworkSpec> teachers;
    PretrainOptions pretrain;
    MealConfig meal;
    std::vector<std::uint64_t> ablate_seeds;
    OutputOptions out;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Desk-scale defaults: a 3-class spirals task, three diverse 3-block
/// teachers, and the best-ablation MEAL settings (ce metric, intermediate
/// alignment, adversary on, average pooling, block weights [0.01, 0.05, 1]).
ExperimentConfig default_config();

/// Strict JSON parse: unknown keys are rejected, missing keys fall back to
/// defaults, and absent seeds are derived from the master seed.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

/// Emits every field, with all seeds resolved; re-parsing yields an equal
/// configuration.
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace meal
