#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "meal/data.hpp"
#include "meal/tensor.hpp"
#include "meal/trainer.hpp"

namespace meal {

/// Dataset CSV: header "label,f0,...,f{d-1}", one example per row, features
/// printed with 17 significant digits so a save/load/save round-trip is
/// byte-identical.
void save_dataset(const std::string& path, const Dataset& dataset);

/// expected_classes = 0 infers the class count as max label + 1.
Dataset load_dataset(const std::string& path, std::size_t expected_classes = 0,
                     Split split = Split::test);

/// Checkpoint binary: magic "MEALCKPT1", then per named parameter
/// (name-sorted): u32 name length, name bytes, u32 rank, u64 extents,
/// row-major f64 data, all little-endian; trailing u64 FNV-1a checksum of
/// every payload byte. Load verifies the magic, then the checksum, then
/// parses.
void save_checkpoint(const std::string& path, const ParamMap& params);
ParamMap load_checkpoint(const std::string& path);

/// Appends MetricsRecord rows as CSV with header
/// "iteration,teacher_index,total_loss,sim_0..,gan_0..,train_error,test_error"
/// (5 + 2k columns for k alignment entries). The trainer flushes at epoch
/// boundaries.
class MetricsSink {
public:
    MetricsSink(const std::string& path, std::size_t num_blocks);

    void append(const MetricsRecord& record);
    void flush();

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::size_t num_blocks_;
    std::ofstream out_;
};

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

}  // namespace meal
