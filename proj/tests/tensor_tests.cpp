#include "doctest.h"

#include <limits>

#include "tvlm/tensor.hpp"

using namespace tvlm;

TEST_CASE("construction and shape bookkeeping") {
    Tensor t({2, 3});
    CHECK(t.rank() == 2);
    CHECK(t.numel() == 6);
    CHECK(t.dim(0) == 2);
    CHECK(t.dim(1) == 3);
    CHECK(t.dim(-1) == 3);
    CHECK(t.dim(-2) == 2);
    for (std::int64_t i = 0; i < t.numel(); ++i) CHECK(t[i] == 0.0);
    CHECK(t.shape_string() == "[2,3]");
}

TEST_CASE("explicit values and row-major at2") {
    Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.at2(0, 0) == 1.0);
    CHECK(t.at2(0, 2) == 3.0);
    CHECK(t.at2(1, 0) == 4.0);
    t.at2(1, 2) = 9.0;
    CHECK(t[5] == 9.0);
}

TEST_CASE("value count must match the shape") {
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
}

TEST_CASE("scalar helpers") {
    Tensor s = Tensor::scalar(4.5);
    CHECK(s.is_scalar());
    CHECK(s.scalar_value() == 4.5);
    Tensor t({2, 2});
    CHECK_FALSE(t.is_scalar());
    CHECK_THROWS_AS((void)t.scalar_value(), ShapeError);
}

TEST_CASE("full and fill") {
    Tensor t = Tensor::full({3}, 2.5);
    CHECK(t[0] == 2.5);
    CHECK(t[2] == 2.5);
    t.fill(-1.0);
    CHECK(t[1] == -1.0);
}

TEST_CASE("same_shape compares shapes not contents") {
    Tensor a({2, 3}), b({2, 3}), c({3, 2});
    CHECK(a.same_shape(b));
    CHECK_FALSE(a.same_shape(c));
}

TEST_CASE("check_finite names the offending op") {
    Tensor t({2});
    t[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(t.check_finite("stress"), doctest::Contains("stress"), NonFiniteError);
    t[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(t.check_finite("stress"), NonFiniteError);
    t[0] = 1.0;
    CHECK_NOTHROW(t.check_finite("stress"));
}

TEST_CASE("dim range errors") {
    Tensor t({2, 3});
    CHECK_THROWS_AS((void)t.dim(2), ShapeError);
    CHECK_THROWS_AS((void)t.dim(-3), ShapeError);
}

TEST_CASE("shape_numel handles empty and zero dims") {
    CHECK(shape_numel({}) == 1);
    CHECK(shape_numel({4, 0}) == 0);
    CHECK(shape_numel({2, 3, 4}) == 24);
}
