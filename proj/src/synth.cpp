#include <algorithm>
#include <cmath>
#include <cstdio>

#include "slideflow/data.hpp"
#include "slideflow/errors.hpp"
#include "slideflow/knn.hpp"

namespace slideflow {

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

Tensor2 neighbor_mean(const Tensor2& y, const NeighborGraph& graph) {
    Tensor2 out(y.rows, y.cols);
    for (std::size_t i = 0; i < y.rows; ++i) {
        auto nb = graph.neighbors(i);
        for (std::uint32_t j : nb)
            for (std::size_t g = 0; g < y.cols; ++g) out.at(i, g) += y.at(j, g);
        double inv = 1.0 / static_cast<double>(nb.size());
        for (std::size_t g = 0; g < y.cols; ++g) out.at(i, g) *= inv;
    }
    return out;
}

}  // namespace

void SynthConfig::validate() const {
    require(spots >= 2, "synth: need at least 2 spots");
    require(genes >= 1 && feature_dim >= 1, "synth: need G >= 1 and d_in >= 1");
    require(rho >= 0.0 && rho < 1.0, "synth: rho must lie in [0, 1)");
    require(snr > 0.0, "synth: snr must be positive");
    require(neighbors >= 1 && neighbors < spots, "synth: neighbors must lie in [1, spots)");
    noise.validate();
}

SynthField synth_field(const SynthConfig& cfg) {
    cfg.validate();
    RngStream root(cfg.seed);
    RngStream coord_rng = root.split(0xC0);
    RngStream feat_rng = root.split(0xFE);
    RngStream map_rng =
        (cfg.map_seed != 0 ? RngStream(cfg.map_seed) : root).split(0xB0);

    const std::size_t n = cfg.spots;
    SynthField out;
    out.coords = Tensor2(n, 2);
    if (cfg.grid_layout) {
        auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
        for (std::size_t i = 0; i < n; ++i) {
            out.coords.at(i, 0) =
                static_cast<double>(i % side) + coord_rng.uniform(-0.3, 0.3);
            out.coords.at(i, 1) =
                static_cast<double>(i / side) + coord_rng.uniform(-0.3, 0.3);
        }
    } else {
        double side = std::sqrt(static_cast<double>(n));
        for (double& v : out.coords.data) v = coord_rng.uniform(0.0, side);
    }

    out.features = Tensor2(n, cfg.feature_dim);
    for (double& v : out.features.data) v = feat_rng.normal();

    Tensor2 map(cfg.feature_dim, cfg.genes);
    double scale = cfg.snr / std::sqrt(static_cast<double>(cfg.feature_dim));
    for (double& v : map.data) v = map_rng.normal() * scale;

    Tensor2 base = matmul(out.features, map);
    for (double& v : base.data) v = softplus(v);

    // Fixed point of Y = (1-rho) base + rho * neighbor_mean(Y). The update is
    // a contraction with factor rho, so convergence within the iteration cap
    // is guaranteed for rho bounded away from 1.
    NeighborGraph graph = knn_graph(out.coords, cfg.neighbors);
    out.field = base;
    if (cfg.rho > 0.0) {
        for (int it = 0; it < 500; ++it) {
            Tensor2 next = neighbor_mean(out.field, graph);
            for (std::size_t i = 0; i < next.size(); ++i)
                next.data[i] = (1.0 - cfg.rho) * base.data[i] + cfg.rho * next.data[i];
            double delta = 0;
            for (std::size_t i = 0; i < next.size(); ++i)
                delta = std::max(delta, std::abs(next.data[i] - out.field.data[i]));
            out.field = std::move(next);
            if (delta < 1e-10) return out;
        }
        throw NumericError("synth: coupling fixed point did not converge in 500 iterations");
    }
    return out;
}

SlideData synth_slide(const SynthConfig& cfg) {
    SynthField f = synth_field(cfg);
    RngStream noise_rng = RngStream(cfg.seed).split(0x21B);

    SlideData s;
    s.id = "synth_" + std::to_string(cfg.seed);
    s.coords = std::move(f.coords);
    s.features = std::move(f.features);
    s.expression = Tensor2(cfg.spots, cfg.genes);
    ZinbParams p = cfg.noise;
    for (std::size_t i = 0; i < s.expression.size(); ++i) {
        p.mu = f.field.data[i];
        s.expression.data[i] = static_cast<double>(zinb_draw(p, noise_rng));
    }
    s.gene_names.reserve(cfg.genes);
    char name[24];
    for (std::size_t g = 0; g < cfg.genes; ++g) {
        std::snprintf(name, sizeof name, "g%04zu", g);
        s.gene_names.emplace_back(name);
    }
    s.normalized = false;
    s.validate();
    return s;
}

}  // namespace slideflow
