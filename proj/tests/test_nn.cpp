#include "slideflow/nn.hpp"

#include <cmath>

#include "doctest.h"
#include "slideflow/errors.hpp"

using namespace slideflow;

namespace {
DenseLayer layer(Tensor2 w, Tensor2 b) { return DenseLayer{std::move(w), std::move(b)}; }
}  // namespace

TEST_CASE("mlp_forward: zeros propagate through zero-bias layers") {
    std::vector<DenseLayer> layers;
    layers.push_back(layer(Tensor2::from({{1, 2}, {3, 4}}), Tensor2(1, 2)));
    layers.push_back(layer(Tensor2::from({{5}, {6}}), Tensor2(1, 1)));
    Tensor2 out = mlp_forward(Tensor2(1, 2), layers, Activation::relu);
    REQUIRE(out.rows == 1);
    REQUIRE(out.cols == 1);
    CHECK(out.data[0] == 0.0);
}

TEST_CASE("mlp_forward: identity layer passes input through") {
    std::vector<DenseLayer> layers;
    layers.push_back(layer(Tensor2::from({{1, 0}, {0, 1}}), Tensor2(1, 2)));
    Tensor2 out = mlp_forward(Tensor2::from({{1, 2}}), layers, Activation::identity);
    CHECK(out.at(0, 0) == 1.0);
    CHECK(out.at(0, 1) == 2.0);
}

TEST_CASE("mlp_forward: hand-evaluated linear+ReLU layer") {
    // x=[[1,0]], W=[[2,0],[0,3]], b=[1,1] -> [3,1]; ReLU after a non-final
    // layer, so add an identity second layer to exercise the activation.
    std::vector<DenseLayer> layers;
    layers.push_back(layer(Tensor2::from({{2, 0}, {0, 3}}), Tensor2::from({{1, 1}})));
    layers.push_back(layer(Tensor2::from({{1, 0}, {0, 1}}), Tensor2(1, 2)));
    Tensor2 out = mlp_forward(Tensor2::from({{1, 0}}), layers, Activation::relu);
    CHECK(out.at(0, 0) == doctest::Approx(3.0));
    CHECK(out.at(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("mlp_forward: activation is skipped on the final layer") {
    std::vector<DenseLayer> layers;
    layers.push_back(layer(Tensor2::from({{1.0}}), Tensor2::from({{-5.0}})));
    Tensor2 out = mlp_forward(Tensor2::from({{1.0}}), layers, Activation::relu);
    CHECK(out.data[0] == -4.0);  // would be 0 if ReLU applied
}

TEST_CASE("mlp_forward: leaky slope applies between layers") {
    std::vector<DenseLayer> layers;
    layers.push_back(layer(Tensor2::from({{1.0}}), Tensor2(1, 1)));
    layers.push_back(layer(Tensor2::from({{1.0}}), Tensor2(1, 1)));
    Tensor2 out = mlp_forward(Tensor2::from({{-2.0}}), layers, Activation::leaky_relu, 0.2);
    CHECK(out.data[0] == doctest::Approx(-0.4));
}

TEST_CASE("mlp_forward names the offending layer on dimension mismatch") {
    std::vector<DenseLayer> layers;
    layers.push_back(layer(Tensor2::from({{1, 0}, {0, 1}}), Tensor2(1, 2)));
    layers.push_back(layer(Tensor2(3, 1), Tensor2(1, 1)));  // expects width 3, gets 2
    try {
        mlp_forward(Tensor2(1, 2), layers, Activation::relu);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }
}

TEST_CASE("softmax_over_groups: spec examples") {
    SUBCASE("uniform scores") {
        auto out = softmax_over_groups({0, 0, 0}, {{0, 1, 2}});
        for (double v : out) CHECK(v == doctest::Approx(1.0 / 3));
    }
    SUBCASE("extreme scores do not overflow") {
        auto out = softmax_over_groups({1000, 0}, {{0, 1}});
        CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("closed form ln2") {
        auto out = softmax_over_groups({std::log(2.0), 0.0}, {{0, 1}});
        CHECK(out[0] == doctest::Approx(2.0 / 3));
        CHECK(out[1] == doctest::Approx(1.0 / 3));
    }
}

TEST_CASE("softmax_over_groups: groups sum to 1 and ignore constant shifts") {
    RngStream rng(5);
    std::vector<double> scores(10);
    for (double& s : scores) s = rng.uniform(-3, 3);
    std::vector<std::vector<std::size_t>> groups = {{0, 4, 2}, {1, 3}, {5, 6, 7, 8, 9}};
    auto out = softmax_over_groups(scores, groups);
    for (const auto& g : groups) {
        double sum = 0;
        for (auto i : g) {
            CHECK(out[i] > 0.0);
            sum += out[i];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    auto shifted = scores;
    for (auto i : groups[1]) shifted[i] += 123.456;
    auto out2 = softmax_over_groups(shifted, groups);
    for (std::size_t i = 0; i < out.size(); ++i)
        CHECK(std::abs(out[i] - out2[i]) < 1e-12);
}

TEST_CASE("softmax_over_groups rejects bad partitions") {
    CHECK_THROWS_AS(softmax_over_groups({1, 2}, {{0, 1}, {}}), ContractViolation);
    CHECK_THROWS_AS(softmax_over_groups({1, 2}, {{0}}), ContractViolation);        // uncovered
    CHECK_THROWS_AS(softmax_over_groups({1, 2}, {{0, 1}, {1}}), ContractViolation);  // overlap
}

TEST_CASE("init_dense: fan-in bound and zero bias") {
    RngStream rng(3);
    DenseLayer l = init_dense(12, 7, rng);
    double bound = std::sqrt(3.0 / 12.0);
    for (double w : l.weight.data) {
        CHECK(w >= -bound);
        CHECK(w <= bound);
    }
    for (double b : l.bias.data) CHECK(b == 0.0);
}
