#include "actrec/tensor.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <utility>

namespace actrec {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    if (shape.empty()) {
        throw ShapeError("shape must have at least one extent");
    }
    std::size_t n = 1;
    for (std::size_t e : shape) {
        if (e == 0) {
            throw ShapeError("zero extent in shape");
        }
        n *= e;
    }
    return n;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    return full(std::move(shape), 0.0);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    const std::size_t n = shape_product(shape);
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_.assign(n, value);
    return t;
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> data) {
    const std::size_t n = shape_product(shape);
    if (n != data.size()) {
        throw ShapeError("data length does not match shape product");
    }
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    return t;
}

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const {
    const std::size_t n = shape_product(new_shape);
    if (n != size()) {
        throw ShapeError("reshape must preserve element count");
    }
    Tensor t;
    t.shape_ = std::move(new_shape);
    t.data_ = data_;
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

Tensor normal(Rng& rng, std::vector<std::size_t> shape, double mean, double stddev) {
    if (stddev < 0.0) {
        throw ParamError("normal: stddev must be >= 0");
    }
    Tensor t = Tensor::zeros(std::move(shape));
    if (stddev == 0.0) {
        for (double& v : t.values()) {
            v = mean;
        }
        return t;
    }
    for (double& v : t.values()) {
        v = rng.next_normal(mean, stddev);
    }
    return t;
}

Tensor truncated_normal(Rng& rng, std::vector<std::size_t> shape, double stddev, double bound) {
    if (stddev <= 0.0 || bound <= 0.0) {
        throw ParamError("truncated_normal: stddev and bound must be > 0");
    }
    const double limit = bound * stddev;
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.values()) {
        double x;
        do {
            x = rng.next_normal(0.0, stddev);
        } while (std::abs(x) > limit);
        v = x;
    }
    return t;
}

namespace {

void require_rank2(const Tensor& t, const char* what) {
    if (t.rank() != 2) {
        throw ShapeError(std::string(what) + ": rank-2 tensor required");
    }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    const std::size_t m = a.extent(0), k = a.extent(1);
    const std::size_t k2 = b.extent(0), n = b.extent(1);
    if (k != k2) {
        throw ShapeError("matmul: inner dimensions disagree");
    }
    Tensor out = Tensor::zeros({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = pa[i * k + kk];
            const double* brow = pb + kk * n;
            double* orow = po + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                orow[j] += av * brow[j];
            }
        }
    }
    return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul_tn");
    require_rank2(b, "matmul_tn");
    const std::size_t k = a.extent(0), m = a.extent(1);
    const std::size_t k2 = b.extent(0), n = b.extent(1);
    if (k != k2) {
        throw ShapeError("matmul_tn: inner dimensions disagree");
    }
    Tensor out = Tensor::zeros({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t kk = 0; kk < k; ++kk) {
        const double* arow = pa + kk * m;
        const double* brow = pb + kk * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            double* orow = po + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                orow[j] += av * brow[j];
            }
        }
    }
    return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul_nt");
    require_rank2(b, "matmul_nt");
    const std::size_t m = a.extent(0), k = a.extent(1);
    const std::size_t n = b.extent(0), k2 = b.extent(1);
    if (k != k2) {
        throw ShapeError("matmul_nt: inner dimensions disagree");
    }
    Tensor out = Tensor::zeros({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = pa + i * k;
        double* orow = po + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = pb + j * k;
            double acc = 0.0;
            for (std::size_t kk = 0; kk < k; ++kk) {
                acc += arow[kk] * brow[kk];
            }
            orow[j] = acc;
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    require_rank2(a, "transpose");
    const std::size_t m = a.extent(0), n = a.extent(1);
    Tensor out = Tensor::zeros({n, m});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out(j, i) = a(i, j);
        }
    }
    return out;
}

void write_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    out.write(b, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    out.write(b, 8);
}

void write_f64(std::ostream& out, double v) {
    write_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw IoError("unexpected end of stream reading u32");
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    }
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) {
        throw IoError("unexpected end of stream reading u64");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    return v;
}

double read_f64(std::istream& in) {
    return std::bit_cast<double>(read_u64(in));
}

void write_tensor(std::ostream& out, const Tensor& t) {
    if (t.empty()) {
        throw ShapeError("write_tensor: empty tensor");
    }
    write_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t e : t.shape()) {
        if (e > std::numeric_limits<std::uint32_t>::max()) {
            throw ShapeError("write_tensor: extent exceeds u32");
        }
        write_u32(out, static_cast<std::uint32_t>(e));
    }
    for (double v : t.values()) {
        write_f64(out, v);
    }
    if (!out) {
        throw IoError("write_tensor: stream failure");
    }
}

Tensor read_tensor(std::istream& in) {
    const std::uint32_t rank = read_u32(in);
    if (rank == 0 || rank > 8) {
        throw IoError("read_tensor: implausible rank");
    }
    std::vector<std::size_t> shape(rank);
    for (auto& e : shape) {
        e = read_u32(in);
    }
    const std::size_t n = shape_product(shape);
    std::vector<double> data(n);
    for (auto& v : data) {
        v = read_f64(in);
    }
    return Tensor::from(std::move(shape), std::move(data));
}

}  // namespace actrec
