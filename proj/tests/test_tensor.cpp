#include "slideflow/tensor.hpp"

#include <limits>

#include "doctest.h"
#include "slideflow/errors.hpp"

using namespace slideflow;

TEST_CASE("matmul matches hand computation") {
    Tensor2 a = Tensor2::from({{1, 2, 3}, {4, 5, 6}});
    Tensor2 b = Tensor2::from({{7, 8}, {9, 10}, {11, 12}});
    Tensor2 c = matmul(a, b);
    REQUIRE(c.rows == 2);
    REQUIRE(c.cols == 2);
    CHECK(c.at(0, 0) == doctest::Approx(58));
    CHECK(c.at(0, 1) == doctest::Approx(64));
    CHECK(c.at(1, 0) == doctest::Approx(139));
    CHECK(c.at(1, 1) == doctest::Approx(154));
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
    Tensor2 a(2, 3), b(2, 2);
    CHECK_THROWS_AS(matmul(a, b), ShapeError);
}

TEST_CASE("transposed matmul variants agree with explicit transpose") {
    Tensor2 a = Tensor2::from({{1, 2}, {3, 4}, {5, 6}});
    Tensor2 b = Tensor2::from({{1, -1}, {0, 2}, {3, 1}});
    Tensor2 tn = matmul_tn(a, b);  // a^T b: 2x2
    Tensor2 ref = matmul(transpose(a), b);
    REQUIRE(tn.same_shape(ref));
    for (std::size_t i = 0; i < tn.size(); ++i) CHECK(tn.data[i] == doctest::Approx(ref.data[i]));

    Tensor2 d = Tensor2::from({{1, -1}, {0, 2}, {3, 1}, {2, 2}});  // 4x2
    Tensor2 nt = matmul_nt(a, d);                                  // a * d^T: 3x4
    Tensor2 ref2 = matmul(a, transpose(d));
    REQUIRE(nt.same_shape(ref2));
    for (std::size_t i = 0; i < nt.size(); ++i) CHECK(nt.data[i] == doctest::Approx(ref2.data[i]));
}

TEST_CASE("elementwise helpers") {
    Tensor2 a = Tensor2::from({{1, 2}, {3, 4}});
    Tensor2 b = Tensor2::from({{10, 20}, {30, 40}});
    CHECK(add(a, b).at(1, 1) == 44);
    CHECK(sub(b, a).at(0, 0) == 9);
    CHECK(hadamard(a, b).at(1, 0) == 90);
    CHECK(scaled(a, 0.5).at(0, 1) == 1.0);
    Tensor2 cs = col_sum(a);
    REQUIRE(cs.rows == 1);
    CHECK(cs.at(0, 0) == 4);
    CHECK(cs.at(0, 1) == 6);
    CHECK(sum_all(a) == 10);
    CHECK(frobenius_norm(Tensor2::from({{3, 4}})) == doctest::Approx(5.0));
}

TEST_CASE("finite check catches NaN and Inf") {
    Tensor2 a(2, 2, 1.0);
    CHECK(a.all_finite());
    a.at(1, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(a.all_finite());
    a.at(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(a.all_finite());
}

TEST_CASE("MAC counter tracks GEMM work") {
    reset_mac_count();
    Tensor2 a(3, 4), b(4, 5);
    matmul(a, b);
    CHECK(mac_count() == 3u * 4u * 5u);
    matmul_tn(a, Tensor2(3, 2));
    CHECK(mac_count() == 3u * 4u * 5u + 4u * 3u * 2u);
    reset_mac_count();
    CHECK(mac_count() == 0);
}
