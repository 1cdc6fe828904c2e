#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace meal {

/// Dense extents of a multi-dimensional array. Rank is always >= 1;
/// a scalar is represented as rank-1 with extent 1.
struct Shape {
    std::vector<std::size_t> dims;

    Shape() : dims{0} {}
    Shape(std::initializer_list<std::size_t> d) : dims(d) {}
    explicit Shape(std::vector<std::size_t> d) : dims(std::move(d)) {}

    std::size_t rank() const { return dims.size(); }
    std::size_t extent(std::size_t axis) const { return dims.at(axis); }
    std::size_t elements() const {
        std::size_t n = 1;
        for (std::size_t d : dims) n *= d;
        return n;
    }
    bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

/// Row-major 64-bit real buffer with a shape. Plain data, freely copyable.
struct Tensor {
    Shape shape{};
    std::vector<double> data;

    Tensor() = default;
    Tensor(Shape s, std::vector<double> d);

    static Tensor zeros(Shape s);
    static Tensor full(Shape s, double value);

    // rank-2 accessors
    double& at(std::size_t row, std::size_t col);
    double at(std::size_t row, std::size_t col) const;
    std::size_t rows() const { return shape.extent(0); }
    std::size_t cols() const { return shape.extent(1); }

    bool operator==(const Tensor&) const = default;
};

/// Named parameter tensors, ordered by name. The sorted order is the
/// canonical serialization order for checkpoints.
using ParamMap = std::map<std::string, Tensor>;

/// FNV-1a over raw bytes; also used as the checkpoint payload checksum.
std::uint64_t fnv1a64(const void* bytes, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull);

/// Order-sensitive hash of every name, shape and data byte in the map.
/// Used to assert parameter immutability (frozen teachers, untouched stacks).
std::uint64_t param_hash(const ParamMap& params);

}  // namespace meal
