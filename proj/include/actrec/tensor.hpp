#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "actrec/common.hpp"
#include "actrec/rng.hpp"

namespace actrec {

// Dense row-major array of doubles (last axis fastest). Element (i,j,k) of a
// [A,B,C] tensor lives at flat index i*B*C + j*C + k. The shape is fixed at
// construction; reshaped() returns a copy with the same element count.
class Tensor {
public:
    Tensor() = default;  // empty placeholder; all ops reject it

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double value);
    static Tensor from(std::vector<std::size_t> shape, std::vector<double> data);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_[axis]; }
    bool empty() const { return data_.empty(); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    // Unchecked row-major accessors.
    double& operator()(std::size_t i) { return data_[i]; }
    double operator()(std::size_t i) const { return data_[i]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }

    Tensor reshaped(std::vector<std::size_t> new_shape) const;

    bool all_finite() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);  // ShapeError on empty/zero

// Random fills. Both thread the given generator; identical seeds give
// identical tensors.
Tensor normal(Rng& rng, std::vector<std::size_t> shape, double mean, double stddev);
// Zero-mean Gaussian with draws beyond bound*stddev rejected and redrawn;
// every element satisfies |x| <= bound*stddev.
Tensor truncated_normal(Rng& rng, std::vector<std::size_t> shape, double stddev, double bound);

Tensor matmul(const Tensor& a, const Tensor& b);     // [m,k] x [k,n] -> [m,n]
Tensor matmul_tn(const Tensor& a, const Tensor& b);  // a' x b: [k,m] x [k,n] -> [m,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a x b': [m,k] x [n,k] -> [m,n]
Tensor transpose(const Tensor& a);                   // rank-2 only

template <class F>
Tensor map(const Tensor& t, F f) {
    if (t.empty()) {
        throw ShapeError("map: empty tensor");
    }
    Tensor out = t;
    for (double& v : out.values()) {
        v = f(v);
    }
    return out;
}

template <class F>
Tensor zip_map(const Tensor& a, const Tensor& b, F f) {
    if (a.empty() || !a.same_shape(b)) {
        throw ShapeError("zip_map: shape mismatch");
    }
    Tensor out = a;
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        po[i] = f(po[i], pb[i]);
    }
    return out;
}

// Checkpoint wire format, byte-exact:
//   u32 rank | u32 extent[rank] | f64 data[product]
// every field little-endian; f64 is the IEEE-754 bit pattern.
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

// Little-endian scalar helpers shared by tensor and checkpoint files.
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);

}  // namespace actrec
