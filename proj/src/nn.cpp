#include "slideflow/nn.hpp"

#include <algorithm>
#include <cmath>

#include "slideflow/errors.hpp"

namespace slideflow {

DenseLayer init_dense(std::size_t in, std::size_t out, RngStream& rng) {
    require(in > 0 && out > 0, "init_dense: zero-sized layer");
    DenseLayer l{Tensor2(in, out), Tensor2(1, out)};
    double bound = std::sqrt(3.0 / static_cast<double>(in));
    for (double& w : l.weight.data) w = rng.uniform(-bound, bound);
    return l;
}

Tensor2 mlp_forward(const Tensor2& x, std::span<const DenseLayer> layers, Activation act,
                    double leaky_slope) {
    require(!layers.empty(), "mlp_forward: needs at least one layer");
    Tensor2 h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const DenseLayer& l = layers[i];
        require_shape(h.cols == l.weight.rows,
                      "mlp_forward: layer " + std::to_string(i) + " expects input width " +
                          std::to_string(l.weight.rows) + ", got " + std::to_string(h.cols));
        require_shape(l.bias.rows == 1 && l.bias.cols == l.weight.cols,
                      "mlp_forward: layer " + std::to_string(i) + " bias shape mismatch");
        h = matmul(h, l.weight);
        for (std::size_t r = 0; r < h.rows; ++r)
            for (std::size_t c = 0; c < h.cols; ++c) h.at(r, c) += l.bias.at(0, c);
        if (i + 1 < layers.size() && act != Activation::identity) {
            double slope = act == Activation::relu ? 0.0 : leaky_slope;
            for (double& v : h.data)
                if (v < 0.0) v *= slope;
        }
    }
    return h;
}

std::vector<double> softmax_over_groups(const std::vector<double>& scores,
                                        const std::vector<std::vector<std::size_t>>& groups) {
    std::vector<double> out(scores.size(), 0.0);
    std::vector<bool> seen(scores.size(), false);
    for (const auto& g : groups) {
        require(!g.empty(), "softmax_over_groups: empty group");
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t i : g) {
            require(i < scores.size(), "softmax_over_groups: index out of range");
            require(!seen[i], "softmax_over_groups: index appears in two groups");
            seen[i] = true;
            mx = std::max(mx, scores[i]);
        }
        double z = 0.0;
        for (std::size_t i : g) z += (out[i] = std::exp(scores[i] - mx));
        for (std::size_t i : g) out[i] /= z;
    }
    require(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }),
            "softmax_over_groups: groups must cover every score");
    return out;
}

}  // namespace slideflow
