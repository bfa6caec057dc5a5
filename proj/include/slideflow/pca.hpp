#pragma once

#include <array>
#include <span>

namespace slideflow {

// Principal axes of a 2-D point cloud via the closed-form eigendecomposition
// of the 2x2 covariance. Sign convention: each eigenvector's largest-magnitude
// coordinate is made positive (ties broken toward the x coordinate).
struct Pca2 {
    std::array<double, 2> centroid{0.0, 0.0};
    std::array<double, 2> u1{1.0, 0.0};  // eigenvector of the larger eigenvalue
    std::array<double, 2> u2{0.0, 1.0};
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    // All points (near-)coincident, or variance confined to a single axis
    // direction with the rest vanishing: axes fall back to canonical x/y.
    bool degenerate = false;
    // lambda1 == lambda2 to within 1e-9 relative: axes are arbitrary up to
    // rotation, flagged so invariance checks can skip such spots.
    bool eigen_tie = false;
};

Pca2 pca_2d(std::span<const std::array<double, 2>> pts);

}  // namespace slideflow
