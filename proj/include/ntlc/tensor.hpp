#ifndef NTLC_TENSOR_HPP
#define NTLC_TENSOR_HPP

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "ntlc/error.hpp"

namespace ntlc {

// Dense row-major tensor. float for training/storage; tests instantiate
// double for tight finite-difference oracles.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), v(numel_of(shape)) {}
    Tensor(std::vector<int> s, std::vector<T> values)
        : shape(std::move(s)), v(std::move(values)) {
        if (static_cast<int64_t>(v.size()) != numel_of(shape))
            throw ShapeMismatch("tensor data size does not match shape");
    }

    static int64_t numel_of(const std::vector<int>& s) {
        int64_t n = 1;
        for (int d : s) {
            if (d < 0) throw ShapeMismatch("negative dimension");
            n *= d;
        }
        return n;
    }

    int64_t numel() const { return static_cast<int64_t>(v.size()); }
    T* data() { return v.data(); }
    const T* data() const { return v.data(); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    int rank() const { return static_cast<int>(shape.size()); }

    void fill(T value) { std::fill(v.begin(), v.end(), value); }

    std::string shape_str() const {
        std::string s = "[";
        for (size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(shape[i]);
        }
        return s + "]";
    }
};

// Token-id batches for the embedding layer.
struct IntTensor {
    std::vector<int> shape;
    std::vector<int32_t> v;

    IntTensor() = default;
    explicit IntTensor(std::vector<int> s)
        : shape(std::move(s)), v(static_cast<size_t>(Tensor<float>::numel_of(shape))) {}

    int64_t numel() const { return static_cast<int64_t>(v.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
};

} // namespace ntlc

#endif
