#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "meal/tensor.hpp"

namespace meal {

enum class Split : std::uint8_t { train, test };

struct Dataset {
    Tensor features;          // [n x d]
    std::vector<int> labels;  // each in [0, num_classes)
    std::size_t num_classes = 0;
    Split split = Split::train;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.shape.rank() == 2 ? features.cols() : 0; }

    /// Row/label subset in the given index order.
    Dataset gather(std::span<const std::size_t> indices) const;
};

enum class SyntheticKind : std::uint8_t { blobs, rings, spirals };

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::blobs;
    std::size_t n_per_class = 100;
    std::size_t num_classes = 3;
    double noise_sigma = 0.1;
    std::size_t dim = 2;  // blobs accept any dim >= 1; rings/spirals need 2
    std::uint64_t seed = 0;

    bool operator==(const SyntheticSpec&) const = default;
};

/// Deterministic synthetic classification data with an 80/20 per-class
/// train/test split. Blobs are Gaussian clusters at distinct centers, rings
/// concentric annuli, spirals interleaved arms.
std::pair<Dataset, Dataset> gen_synthetic(const SyntheticSpec& spec);

const char* to_string(SyntheticKind k);
SyntheticKind kind_from_string(std::string_view name);

}  // namespace meal
