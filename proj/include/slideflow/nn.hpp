#pragma once

#include <span>
#include <vector>

#include "slideflow/rng.hpp"
#include "slideflow/tensor.hpp"

namespace slideflow {

enum class Activation { identity, relu, leaky_relu };

struct DenseLayer {
    Tensor2 weight;  // in x out
    Tensor2 bias;    // 1 x out
};

// Uniform(-sqrt(3/fan_in), +sqrt(3/fan_in)) weights, zero bias.
DenseLayer init_dense(std::size_t in, std::size_t out, RngStream& rng);

// Plain value-level MLP: activation after every layer except the last.
// Dimension mismatches raise ShapeError naming the offending layer index.
Tensor2 mlp_forward(const Tensor2& x, std::span<const DenseLayer> layers, Activation act,
                    double leaky_slope = 0.2);

// Softmax applied independently within each index group. `groups` must
// partition [0, scores.size()): every index in exactly one group, none empty.
// Output is ordered like the input.
std::vector<double> softmax_over_groups(const std::vector<double>& scores,
                                        const std::vector<std::vector<std::size_t>>& groups);

}  // namespace slideflow
