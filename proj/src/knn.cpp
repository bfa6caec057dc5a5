#include "slideflow/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slideflow/errors.hpp"

namespace slideflow {

namespace {

struct Cand {
    double d2;
    std::uint32_t idx;
    bool operator<(const Cand& o) const { return d2 < o.d2 || (d2 == o.d2 && idx < o.idx); }
};

void check_coords(const Tensor2& coords, std::size_t k) {
    require_shape(coords.cols == 2, "knn_graph: coords must be Nx2");
    require(coords.rows >= 2, "knn_graph: needs at least 2 spots");
    require(k >= 1, "knn_graph: k must be at least 1");
    require(coords.all_finite(), "knn_graph: coordinates must be finite");
}

NeighborGraph brute_force(const Tensor2& coords, std::size_t k) {
    std::size_t n = coords.rows;
    NeighborGraph g{n, k, std::min(k, n - 1), {}};
    g.flat.resize(n * g.per_spot);
    std::vector<Cand> cand(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = 0;
        double xi = coords.at(i, 0), yi = coords.at(i, 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double dx = coords.at(j, 0) - xi, dy = coords.at(j, 1) - yi;
            cand[m++] = {dx * dx + dy * dy, static_cast<std::uint32_t>(j)};
        }
        std::partial_sort(cand.begin(), cand.begin() + g.per_spot, cand.end());
        for (std::size_t r = 0; r < g.per_spot; ++r) g.flat[i * g.per_spot + r] = cand[r].idx;
    }
    return g;
}

}  // namespace

NeighborGraph knn_graph(const Tensor2& coords, std::size_t k) {
    check_coords(coords, k);
    std::size_t n = coords.rows;
    if (n < 256) return brute_force(coords, k);

    // Grid-bucket index: ~1 point per cell on average, ring search outward
    // until the k-th best distance provably beats every unscanned cell.
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (std::size_t i = 0; i < n; ++i) {
        xmin = std::min(xmin, coords.at(i, 0));
        xmax = std::max(xmax, coords.at(i, 0));
        ymin = std::min(ymin, coords.at(i, 1));
        ymax = std::max(ymax, coords.at(i, 1));
    }
    std::size_t axis_cells = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
    double h = std::max({(xmax - xmin), (ymax - ymin), 0.0}) /
               static_cast<double>(axis_cells);
    h = std::max(h, 1e-12);
    auto cell_x = [&](double x) {
        auto c = static_cast<long long>((x - xmin) / h);
        return std::clamp<long long>(c, 0, static_cast<long long>(axis_cells) - 1);
    };
    auto cell_y = [&](double y) {
        auto c = static_cast<long long>((y - ymin) / h);
        return std::clamp<long long>(c, 0, static_cast<long long>(axis_cells) - 1);
    };

    // CSR bucket layout.
    std::size_t ncells = axis_cells * axis_cells;
    std::vector<std::uint32_t> counts(ncells + 1, 0);
    std::vector<std::size_t> cell_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        cell_of[i] = static_cast<std::size_t>(cell_y(coords.at(i, 1))) * axis_cells +
                     static_cast<std::size_t>(cell_x(coords.at(i, 0)));
        counts[cell_of[i] + 1]++;
    }
    std::vector<std::size_t> start(ncells + 1, 0);
    for (std::size_t c = 0; c < ncells; ++c) start[c + 1] = start[c] + counts[c + 1];
    std::vector<std::uint32_t> bucket(n);
    {
        std::vector<std::size_t> cursor(start.begin(), start.end() - 1);
        for (std::size_t i = 0; i < n; ++i) bucket[cursor[cell_of[i]]++] = static_cast<std::uint32_t>(i);
    }

    NeighborGraph g{n, k, std::min(k, n - 1), {}};
    g.flat.resize(n * g.per_spot);
    std::vector<Cand> cand;
    auto lim = static_cast<long long>(axis_cells);
    for (std::size_t i = 0; i < n; ++i) {
        double xi = coords.at(i, 0), yi = coords.at(i, 1);
        long long cx = cell_x(xi), cy = cell_y(yi);
        cand.clear();
        long long max_ring = lim;  // rings beyond the grid are empty
        for (long long r = 0; r <= max_ring; ++r) {
            // Cells at Chebyshev cell-distance exactly r.
            for (long long dy = -r; dy <= r; ++dy) {
                long long yc = cy + dy;
                if (yc < 0 || yc >= lim) continue;
                long long xlo = cx - r, xhi = cx + r;
                for (long long xc = xlo; xc <= xhi; ++xc) {
                    if (std::abs(dy) != r && xc != xlo && xc != xhi) continue;
                    if (xc < 0 || xc >= lim) continue;
                    std::size_t c = static_cast<std::size_t>(yc) * axis_cells +
                                    static_cast<std::size_t>(xc);
                    for (std::size_t s = start[c]; s < start[c + 1]; ++s) {
                        std::uint32_t j = bucket[s];
                        if (j == i) continue;
                        double dx = coords.at(j, 0) - xi, dyv = coords.at(j, 1) - yi;
                        cand.push_back({dx * dx + dyv * dyv, j});
                    }
                }
            }
            if (cand.size() >= g.per_spot) {
                std::nth_element(cand.begin(), cand.begin() + (g.per_spot - 1), cand.end());
                double kth = cand[g.per_spot - 1].d2;
                // Any point in an unscanned cell is at least r*h away. Strict
                // comparison so boundary ties keep scanning (index tie-break
                // must see every tied candidate).
                double bound = static_cast<double>(r) * h;
                if (kth < bound * bound) break;
            }
        }
        std::partial_sort(cand.begin(), cand.begin() + g.per_spot, cand.end());
        for (std::size_t rk = 0; rk < g.per_spot; ++rk) g.flat[i * g.per_spot + rk] = cand[rk].idx;
    }
    return g;
}

std::vector<std::array<double, 2>> direction_vectors(const Tensor2& coords,
                                                     const NeighborGraph& graph, std::size_t i) {
    require(i < graph.spot_count, "direction_vectors: spot index out of range");
    require_shape(coords.rows == graph.spot_count && coords.cols == 2,
                  "direction_vectors: coords do not match the graph");
    auto nb = graph.neighbors(i);
    std::vector<std::array<double, 2>> out(nb.size());
    for (std::size_t r = 0; r < nb.size(); ++r) {
        out[r] = {coords.at(i, 0) - coords.at(nb[r], 0), coords.at(i, 1) - coords.at(nb[r], 1)};
    }
    return out;
}

}  // namespace slideflow
