#pragma once

#include <array>
#include <span>
#include <vector>

#include "slideflow/knn.hpp"
#include "slideflow/pca.hpp"
#include "slideflow/tensor.hpp"

namespace slideflow {

// Per-spot local frames: PCA axes of the direction-vector set, enumerated
// over the four sign choices (a1, a2) in {-1,+1}^2. Projections through all
// four frames, averaged downstream, are what makes the encoder E(2)-invariant.
struct FrameEntry {
    std::array<double, 2> centroid{0.0, 0.0};
    std::array<double, 2> u1{1.0, 0.0};
    std::array<double, 2> u2{0.0, 1.0};
    bool degenerate = false;
    bool eigen_tie = false;

    // Row-major 2x2 U_g with columns (a1*u1, a2*u2); g in [0,4) enumerates
    // (a1,a2) = (+,+), (+,-), (-,+), (-,-).
    std::array<double, 4> frame(std::size_t g) const;
};

struct FrameSet {
    std::vector<FrameEntry> entries;
};

// PCA over >= 2 direction vectors; degeneracy (collinear/coincident) falls
// back to canonical axes with the flag set.
FrameEntry build_frames(std::span<const std::array<double, 2>> dirs);

// Frames for every spot of a graph.
FrameSet build_frame_set(const Tensor2& coords, const NeighborGraph& graph);

// out[e] = (dirs[e] - centroid) * U, with U row-major 2x2.
std::vector<std::array<double, 2>> project_dirs(std::span<const std::array<double, 2>> dirs,
                                                const std::array<double, 4>& U,
                                                const std::array<double, 2>& centroid);

}  // namespace slideflow
