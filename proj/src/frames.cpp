#include "slideflow/frames.hpp"

#include "slideflow/errors.hpp"

namespace slideflow {

std::array<double, 4> FrameEntry::frame(std::size_t g) const {
    require(g < 4, "FrameEntry::frame: g must be in [0, 4)");
    double a1 = (g & 2) ? -1.0 : 1.0;
    double a2 = (g & 1) ? -1.0 : 1.0;
    // Columns are a1*u1 and a2*u2.
    return {a1 * u1[0], a2 * u2[0], a1 * u1[1], a2 * u2[1]};
}

FrameEntry build_frames(std::span<const std::array<double, 2>> dirs) {
    require(dirs.size() >= 2, "build_frames: needs at least 2 direction vectors");
    Pca2 p = pca_2d(dirs);
    FrameEntry e;
    e.centroid = p.centroid;
    e.u1 = p.u1;
    e.u2 = p.u2;
    e.degenerate = p.degenerate;
    e.eigen_tie = p.eigen_tie;
    return e;
}

FrameSet build_frame_set(const Tensor2& coords, const NeighborGraph& graph) {
    FrameSet fs;
    fs.entries.resize(graph.spot_count);
    for (std::size_t i = 0; i < graph.spot_count; ++i) {
        auto dirs = direction_vectors(coords, graph, i);
        if (dirs.size() >= 2) {
            fs.entries[i] = build_frames(dirs);
        } else {
            // Single-neighbor neighborhoods carry no PCA structure; use the
            // canonical degenerate frame centered on the lone direction.
            FrameEntry e;
            e.centroid = dirs.empty() ? std::array<double, 2>{0.0, 0.0} : dirs[0];
            e.degenerate = true;
            fs.entries[i] = e;
        }
    }
    return fs;
}

std::vector<std::array<double, 2>> project_dirs(std::span<const std::array<double, 2>> dirs,
                                                const std::array<double, 4>& U,
                                                const std::array<double, 2>& centroid) {
    std::vector<std::array<double, 2>> out(dirs.size());
    for (std::size_t e = 0; e < dirs.size(); ++e) {
        double dx = dirs[e][0] - centroid[0], dy = dirs[e][1] - centroid[1];
        out[e] = {dx * U[0] + dy * U[2], dx * U[1] + dy * U[3]};
    }
    return out;
}

}  // namespace slideflow
