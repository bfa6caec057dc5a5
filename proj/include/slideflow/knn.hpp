#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "slideflow/tensor.hpp"

namespace slideflow {

// Exact k-nearest-neighbor lists, nearest first. Uniform arity: every spot
// has min(k, N-1) neighbors, so the flat layout needs no offsets. Distance
// ties are broken by ascending spot index, which keeps results bit-stable.
struct NeighborGraph {
    std::size_t spot_count = 0;
    std::size_t k = 0;         // requested
    std::size_t per_spot = 0;  // min(k, N-1)
    std::vector<std::uint32_t> flat;

    std::span<const std::uint32_t> neighbors(std::size_t i) const {
        return {flat.data() + i * per_spot, per_spot};
    }
};

// coords: N x 2. Exact Euclidean k-NN via a grid-bucket index (brute force
// below 256 spots). Duplicate coordinates are legal; self is never listed.
NeighborGraph knn_graph(const Tensor2& coords, std::size_t k);

// C_{i->j} = C_i - C_j for each neighbor j of i, in neighbor order.
std::vector<std::array<double, 2>> direction_vectors(const Tensor2& coords,
                                                     const NeighborGraph& graph, std::size_t i);

}  // namespace slideflow
