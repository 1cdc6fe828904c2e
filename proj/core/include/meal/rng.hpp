#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace meal {

/// Derives an independent stream seed from a base seed and a label.
/// Every random decision in the engine draws from a stream named this way
/// so that stages can re-run independently yet reproducibly.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

/// Deterministic random source. std::mt19937_64 is fully specified by the
/// standard; the uniform/normal mappings here are hand-rolled because the
/// std distributions are implementation-defined and would break bitwise
/// reproducibility across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    /// Uniform in [0,1) with 53 bits of randomness.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller.
    double normal();

    /// Uniform index in [0, n). n must be positive.
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace meal
