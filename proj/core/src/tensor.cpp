#include "meal/tensor.hpp"

#include <cstring>
#include <sstream>
#include <stdexcept>

namespace meal {

std::string to_string(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.dims.size(); ++i) {
        if (i) os << 'x';
        os << s.dims[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != shape.elements())
        throw std::invalid_argument("tensor: buffer length " + std::to_string(data.size()) +
                                    " does not match shape " + to_string(shape));
}

Tensor Tensor::zeros(Shape s) {
    std::size_t n = s.elements();
    return Tensor(std::move(s), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(Shape s, double value) {
    std::size_t n = s.elements();
    return Tensor(std::move(s), std::vector<double>(n, value));
}

double& Tensor::at(std::size_t row, std::size_t col) {
    return data[row * shape.extent(1) + col];
}

double Tensor::at(std::size_t row, std::size_t col) const {
    return data[row * shape.extent(1) + col];
}

std::uint64_t fnv1a64(const void* bytes, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t param_hash(const ParamMap& params) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& [name, t] : params) {
        h = fnv1a64(name.data(), name.size(), h);
        for (std::size_t d : t.shape.dims) h = fnv1a64(&d, sizeof(d), h);
        if (!t.data.empty()) h = fnv1a64(t.data.data(), t.data.size() * sizeof(double), h);
    }
    return h;
}

}  // namespace meal
