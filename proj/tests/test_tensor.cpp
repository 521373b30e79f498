#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "actrec/common.hpp"
#include "actrec/rng.hpp"
#include "actrec/tensor.hpp"
#include "test_support.hpp"

using actrec::Rng;
using actrec::Tensor;

namespace {

// Naive triple-loop product, the oracle for the blocked implementations.
Tensor matmul_reference(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.extent(0);
    const std::size_t k = a.extent(1);
    const std::size_t n = b.extent(1);
    Tensor out = Tensor::zeros({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a(i, p) * b(p, j);
            out(i, j) = acc;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("zeros produces all-zero tensors of the right size") {
    const Tensor a = Tensor::zeros({2, 2});
    REQUIRE(a.size() == 4);
    for (double v : a.values()) CHECK(v == 0.0);

    const Tensor b = Tensor::zeros({1});
    REQUIRE(b.size() == 1);
    CHECK(b(0) == 0.0);

    const Tensor c = Tensor::zeros({15, 1961, 4});
    CHECK(c.size() == 117660);
}

TEST_CASE("zero extents and empty shapes are rejected") {
    CHECK_THROWS_AS(Tensor::zeros({}), actrec::ShapeError);
    CHECK_THROWS_AS(Tensor::zeros({3, 0}), actrec::ShapeError);
    CHECK_THROWS_AS(Tensor::from({2, 2}, {1.0, 2.0}), actrec::ShapeError);
}

TEST_CASE("indexing is row-major with the last axis fastest") {
    std::vector<double> arange(2 * 3 * 4);
    for (std::size_t i = 0; i < arange.size(); ++i) arange[i] = double(i);
    const Tensor t = Tensor::from({2, 3, 4}, arange);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            for (std::size_t k = 0; k < 4; ++k) {
                REQUIRE(t(i, j, k) == double(i * 12 + j * 4 + k));
            }
        }
    }
}

TEST_CASE("reshaped keeps data and rejects count changes") {
    const Tensor t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    const Tensor r = t.reshaped({3, 2});
    REQUIRE(r.shape() == std::vector<std::size_t>{3, 2});
    CHECK(r.values() == t.values());
    CHECK_THROWS_AS(t.reshaped({4, 2}), actrec::ShapeError);
}

TEST_CASE("matmul hand cases") {
    const Tensor id = Tensor::from({2, 2}, {1, 0, 0, 1});
    const Tensor m = Tensor::from({2, 2}, {3.5, -1, 2, 7});
    CHECK(matmul(id, m).values() == m.values());

    const Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
    const Tensor b = Tensor::from({2, 1}, {5, 6});
    const Tensor c = matmul(a, b);
    REQUIRE(c.shape() == std::vector<std::size_t>{2, 1});
    CHECK(c(0, 0) == 17.0);
    CHECK(c(1, 0) == 39.0);

    CHECK_THROWS_AS(matmul(a, Tensor::from({3, 1}, {1, 2, 3})), actrec::ShapeError);
}

TEST_CASE("matmul family agrees with the reference product") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 1 + rng.next_u64() % 6;
        const std::size_t k = 1 + rng.next_u64() % 6;
        const std::size_t n = 1 + rng.next_u64() % 6;
        const Tensor a = actrec::normal(rng, {m, k}, 0.0, 1.0);
        const Tensor b = actrec::normal(rng, {k, n}, 0.0, 1.0);
        const Tensor want = matmul_reference(a, b);

        const Tensor got = matmul(a, b);
        const Tensor got_tn = matmul_tn(transpose(a), b);
        const Tensor got_nt = matmul_nt(a, transpose(b));
        REQUIRE(got.same_shape(want));
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(testsup::rel_err(got(i), want(i)) <= 1e-12);
            CHECK(testsup::rel_err(got_tn(i), want(i)) <= 1e-12);
            CHECK(testsup::rel_err(got_nt(i), want(i)) <= 1e-12);
        }
    }
}

TEST_CASE("matmul is associative on small random matrices") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor a = actrec::normal(rng, {4, 5}, 0.0, 1.0);
        const Tensor b = actrec::normal(rng, {5, 3}, 0.0, 1.0);
        const Tensor c = actrec::normal(rng, {3, 6}, 0.0, 1.0);
        const Tensor lhs = matmul(matmul(a, b), c);
        const Tensor rhs = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            CHECK(testsup::rel_err(lhs(i), rhs(i)) <= 1e-9);
        }
    }
}

TEST_CASE("map and zip_map") {
    const Tensor t = Tensor::from({3}, {-1, 0, 2});
    CHECK(actrec::map(t, [](double x) { return x; }).values() == t.values());

    const Tensor relu = actrec::map(t, [](double x) { return std::max(0.0, x); });
    CHECK(relu.values() == std::vector<double>{0, 0, 2});

    const Tensor a = Tensor::from({2}, {1, 2});
    const Tensor b = Tensor::from({2}, {3, 4});
    const Tensor sum = actrec::zip_map(a, b, [](double x, double y) { return x + y; });
    CHECK(sum.values() == std::vector<double>{4, 6});

    CHECK_THROWS_AS(actrec::zip_map(a, Tensor::from({3}, {1, 2, 3}), std::plus<double>()),
                    actrec::ShapeError);
}

TEST_CASE("normal fill: zero stddev, moments, determinism") {
    Rng z(1);
    const Tensor constant = actrec::normal(z, {3}, 0.0, 0.0);
    CHECK(constant.values() == std::vector<double>{0, 0, 0});

    Rng r1(123);
    const Tensor sample = actrec::normal(r1, {100000}, 0.0, 0.3);
    double sum = 0.0;
    double sumsq = 0.0;
    for (double v : sample.values()) {
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / double(sample.size());
    const double stddev = std::sqrt(sumsq / double(sample.size()) - mean * mean);
    CHECK(std::fabs(mean) <= 0.003);
    CHECK(std::fabs(stddev - 0.3) <= 0.01);

    Rng r2(123);
    const Tensor replay = actrec::normal(r2, {100000}, 0.0, 0.3);
    CHECK(replay.values() == sample.values());

    Rng bad(5);
    CHECK_THROWS_AS(actrec::normal(bad, {2}, 0.0, -1.0), actrec::ParamError);
}

TEST_CASE("truncated_normal respects the bound over a million draws") {
    Rng rng(9);
    const Tensor big = actrec::truncated_normal(rng, {1000000}, 0.1, 2.0);
    const auto [lo, hi] = std::minmax_element(big.values().begin(), big.values().end());
    CHECK(*lo >= -0.2);
    CHECK(*hi <= 0.2);

    double sum = 0.0;
    for (double v : big.values()) sum += v;
    CHECK(std::fabs(sum / double(big.size())) <= 0.005);

    Rng a(1);
    Rng b(2);
    const Tensor ta = actrec::truncated_normal(a, {64}, 0.1, 2.0);
    const Tensor tb = actrec::truncated_normal(b, {64}, 0.1, 2.0);
    CHECK(ta.values() != tb.values());

    Rng bad(3);
    CHECK_THROWS_AS(actrec::truncated_normal(bad, {2}, 0.0, 2.0), actrec::ParamError);
    CHECK_THROWS_AS(actrec::truncated_normal(bad, {2}, 0.1, 0.0), actrec::ParamError);
}

TEST_CASE("tensor serialization round-trips bit-exactly") {
    Rng rng(55);
    Tensor t = actrec::normal(rng, {3, 4, 2}, 0.0, 100.0);
    t(0) = -0.0;
    t(1) = 1e-308;
    t(2) = 1.0 / 3.0;

    std::stringstream buf;
    actrec::write_tensor(buf, t);
    const Tensor back = actrec::read_tensor(buf);
    REQUIRE(back.same_shape(t));
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(std::signbit(back(i)) == std::signbit(t(i)));
        CHECK(back(i) == t(i));
    }
}

TEST_CASE("tensor wire format is rank, extents, data, little-endian") {
    const Tensor t = Tensor::from({1, 2}, {1.0, -2.0});
    std::stringstream buf;
    actrec::write_tensor(buf, t);
    const std::string bytes = buf.str();
    REQUIRE(bytes.size() == 4 + 2 * 4 + 2 * 8);
    // rank = 2
    CHECK(static_cast<unsigned char>(bytes[0]) == 2);
    CHECK(static_cast<unsigned char>(bytes[1]) == 0);
    // extents 1, 2
    CHECK(static_cast<unsigned char>(bytes[4]) == 1);
    CHECK(static_cast<unsigned char>(bytes[8]) == 2);
    // 1.0 as IEEE-754 little-endian: 00 00 00 00 00 00 f0 3f
    CHECK(static_cast<unsigned char>(bytes[12 + 6]) == 0xf0);
    CHECK(static_cast<unsigned char>(bytes[12 + 7]) == 0x3f);
}

TEST_CASE("truncated read reports a parse error") {
    const Tensor t = Tensor::from({2, 2}, {1, 2, 3, 4});
    std::stringstream buf;
    actrec::write_tensor(buf, t);
    std::string bytes = buf.str();
    bytes.resize(bytes.size() - 5);
    std::stringstream cut(bytes);
    CHECK_THROWS_AS(actrec::read_tensor(cut), actrec::Error);
}
