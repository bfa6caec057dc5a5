#include "slideflow/frames.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "slideflow/errors.hpp"
#include "slideflow/rng.hpp"

using namespace slideflow;

namespace {
using V = std::array<double, 2>;

// Compare two sets of 2x2 frames as unordered sets (entrywise tolerance).
bool same_frame_set(const std::vector<std::array<double, 4>>& a,
                    const std::vector<std::array<double, 4>>& b, double tol) {
    if (a.size() != b.size()) return false;
    std::vector<bool> used(b.size(), false);
    for (const auto& fa : a) {
        bool found = false;
        for (std::size_t j = 0; j < b.size() && !found; ++j) {
            if (used[j]) continue;
            double m = 0;
            for (int t = 0; t < 4; ++t) m = std::max(m, std::abs(fa[t] - b[j][t]));
            if (m < tol) {
                used[j] = true;
                found = true;
            }
        }
        if (!found) return false;
    }
    return true;
}

std::vector<std::array<double, 4>> all_frames(const FrameEntry& e) {
    return {e.frame(0), e.frame(1), e.frame(2), e.frame(3)};
}
}  // namespace

TEST_CASE("build_frames: collinear pair degenerates with canonical u1") {
    std::vector<V> dirs = {{1, 0}, {-1, 0}};
    FrameEntry e = build_frames(dirs);
    CHECK(e.centroid[0] == doctest::Approx(0.0));
    CHECK(e.centroid[1] == doctest::Approx(0.0));
    CHECK(e.u1[0] == doctest::Approx(1.0));
    CHECK(e.degenerate);
}

TEST_CASE("build_frames: hand eigen-decomposition") {
    std::vector<V> dirs = {{2, 0}, {0, 1}, {-2, 0}, {0, -1}};
    FrameEntry e = build_frames(dirs);
    CHECK(e.u1[0] == doctest::Approx(1.0));
    CHECK(std::abs(e.u1[1]) < 1e-12);
    CHECK(std::abs(e.u2[0]) < 1e-12);
    CHECK(e.u2[1] == doctest::Approx(1.0));
    CHECK_FALSE(e.degenerate);
}

TEST_CASE("build_frames rejects fewer than 2 vectors") {
    std::vector<V> one = {{1, 0}};
    CHECK_THROWS_AS(build_frames(one), ContractViolation);
}

TEST_CASE("frames: exactly four, orthogonal, det ±1, closed under sign flips") {
    std::vector<V> dirs = {{3, 1}, {-2, 0.5}, {0.3, -2}, {1, 1}, {-1, -2}};
    FrameEntry e = build_frames(dirs);
    auto frames = all_frames(e);
    REQUIRE(frames.size() == 4);
    int det_pos = 0;
    for (const auto& U : frames) {
        // Columns orthonormal.
        double c1c1 = U[0] * U[0] + U[2] * U[2];
        double c2c2 = U[1] * U[1] + U[3] * U[3];
        double c1c2 = U[0] * U[1] + U[2] * U[3];
        CHECK(c1c1 == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(c2c2 == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(c1c2) < 1e-9);
        double det = U[0] * U[3] - U[1] * U[2];
        CHECK(std::abs(std::abs(det) - 1.0) < 1e-9);
        det_pos += det > 0;
    }
    CHECK(det_pos == 2);  // two rotations, two reflections

    // Negating u1 (or u2) before enumeration must give the same set.
    FrameEntry flipped = e;
    flipped.u1 = {-e.u1[0], -e.u1[1]};
    CHECK(same_frame_set(frames, all_frames(flipped), 1e-12));
    FrameEntry flipped2 = e;
    flipped2.u2 = {-e.u2[0], -e.u2[1]};
    CHECK(same_frame_set(frames, all_frames(flipped2), 1e-12));
}

TEST_CASE("build_frames: rotating dirs rotates the frame set") {
    RngStream rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<V> dirs;
        for (int i = 0; i < 12; ++i)
            dirs.push_back({3.0 * rng.uniform(-1, 1), rng.uniform(-1, 1)});
        FrameEntry base = build_frames(dirs);
        if (base.degenerate || base.eigen_tie) continue;
        double th = rng.uniform(0, 6.283185307179586);
        double c = std::cos(th), s = std::sin(th);
        std::vector<V> rot;
        for (const auto& d : dirs) rot.push_back({c * d[0] - s * d[1], s * d[0] + c * d[1]});
        FrameEntry e2 = build_frames(rot);
        // R * (old frames) as a set == new frames as a set.
        std::vector<std::array<double, 4>> rotated;
        for (const auto& U : all_frames(base)) {
            rotated.push_back({c * U[0] - s * U[2], c * U[1] - s * U[3],
                               s * U[0] + c * U[2], s * U[1] + c * U[3]});
        }
        CHECK(same_frame_set(rotated, all_frames(e2), 1e-9));
    }
}

TEST_CASE("project_dirs: centroid maps to the origin") {
    std::vector<V> dirs = {{1.5, -2.0}};
    auto out = project_dirs(dirs, {1, 0, 0, 1}, {1.5, -2.0});
    CHECK(out[0][0] == 0.0);
    CHECK(out[0][1] == 0.0);
}

TEST_CASE("project_dirs: identity frame with zero centroid is a no-op") {
    std::vector<V> dirs = {{1, 2}, {-3, 4}};
    auto out = project_dirs(dirs, {1, 0, 0, 1}, {0, 0});
    CHECK(out[0][0] == 1.0);
    CHECK(out[1][1] == 4.0);
}

TEST_CASE("project_dirs: hand-computed rotation product") {
    std::vector<V> dirs = {{1, 1}};
    auto out = project_dirs(dirs, {0, 1, -1, 0}, {0, 0});
    CHECK(out[0][0] == doctest::Approx(-1.0));
    CHECK(out[0][1] == doctest::Approx(1.0));
}

TEST_CASE("E(2) covariance: projected multiset is invariant for non-degenerate spots") {
    RngStream rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        // Random spot cloud.
        Tensor2 coords(40, 2);
        for (std::size_t i = 0; i < 40; ++i) {
            coords.at(i, 0) = rng.uniform(-10, 10) * 2.0;
            coords.at(i, 1) = rng.uniform(-10, 10);
        }
        NeighborGraph g = knn_graph(coords, 6);
        // Random E(2) transform: rotation (+ reflection on odd trials) + translation.
        double th = rng.uniform(0, 6.283185307179586);
        double c = std::cos(th), s = std::sin(th);
        double refl = (trial % 2) ? -1.0 : 1.0;
        double tx = rng.uniform(-100, 100), ty = rng.uniform(-100, 100);
        Tensor2 moved(40, 2);
        for (std::size_t i = 0; i < 40; ++i) {
            double x = coords.at(i, 0), y = refl * coords.at(i, 1);
            moved.at(i, 0) = c * x - s * y + tx;
            moved.at(i, 1) = s * x + c * y + ty;
        }
        NeighborGraph g2 = knn_graph(moved, 6);
        REQUIRE(g.flat == g2.flat);  // isometry preserves the neighbor order
        for (std::size_t i = 0; i < 40; i += 5) {
            auto dirs1 = direction_vectors(coords, g, i);
            auto dirs2 = direction_vectors(moved, g2, i);
            FrameEntry e1 = build_frames(dirs1);
            FrameEntry e2 = build_frames(dirs2);
            if (e1.degenerate || e1.eigen_tie || e2.degenerate || e2.eigen_tie) continue;
            // Multiset of projections over all 4 frames.
            std::vector<V> p1, p2;
            for (std::size_t fg = 0; fg < 4; ++fg) {
                auto a = project_dirs(dirs1, e1.frame(fg), e1.centroid);
                auto b = project_dirs(dirs2, e2.frame(fg), e2.centroid);
                p1.insert(p1.end(), a.begin(), a.end());
                p2.insert(p2.end(), b.begin(), b.end());
            }
            auto key = [](const V& v) { return std::make_pair(v[0], v[1]); };
            std::sort(p1.begin(), p1.end(), [&](const V& x, const V& y) { return key(x) < key(y); });
            std::sort(p2.begin(), p2.end(), [&](const V& x, const V& y) { return key(x) < key(y); });
            for (std::size_t r = 0; r < p1.size(); ++r) {
                CHECK(std::abs(p1[r][0] - p2[r][0]) < 1e-9);
                CHECK(std::abs(p1[r][1] - p2[r][1]) < 1e-9);
            }
        }
    }
}

TEST_CASE("build_frame_set covers every spot and flags single-neighbor graphs") {
    Tensor2 coords = Tensor2::from({{0, 0}, {1, 0}, {0, 1}, {2, 2}});
    NeighborGraph g = knn_graph(coords, 3);
    FrameSet fs = build_frame_set(coords, g);
    CHECK(fs.entries.size() == 4);

    Tensor2 two = Tensor2::from({{0, 0}, {1, 0}});
    NeighborGraph g2 = knn_graph(two, 1);
    FrameSet fs2 = build_frame_set(two, g2);
    CHECK(fs2.entries[0].degenerate);
}
