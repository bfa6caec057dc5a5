#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "slideflow/autodiff.hpp"
#include "slideflow/frames.hpp"
#include "slideflow/knn.hpp"
#include "slideflow/rng.hpp"
#include "slideflow/tensor.hpp"

namespace slideflow {

struct DenoiserConfig {
    std::size_t layers = 4;
    std::size_t heads = 4;
    std::size_t hidden = 128;    // d; must be divisible by heads
    std::size_t neighbors = 8;   // k
    double dropout = 0.2;
    std::size_t genes = 0;       // G
    std::size_t feature_dim = 0; // d_in
    std::size_t time_dim = 16;   // sinusoidal embedding width (even)

    void validate() const;
};

// Sinusoidal conditioning features: dim/2 geometric frequencies in [1, 1000],
// laid out [sin(2*pi*f_m*t)...,  cos(2*pi*f_m*t)...].
std::vector<double> time_embed(double t, std::size_t dim);

// All learnable tensors plus an index structure describing what each one is.
// params/names are parallel; the Lin/Mlp refs index into params.
struct DenoiserModel {
    struct Lin {
        std::size_t w = 0, b = 0;
    };
    struct Mlp {
        Lin l1, l2;
    };
    struct LayerRefs {
        Lin q, k, v;
        Mlp pair_enc;            // 2 -> d -> d
        std::vector<Mlp> score;  // per head: (2*d/H + d + G) -> d -> 1
        Mlp agg;                 // 2d -> d -> d
        Mlp expr;                // d -> d -> G
    };

    DenoiserConfig config;
    std::vector<Tensor2> params;
    std::vector<std::string> names;
    Lin input_proj;  // (d_in + time_dim) -> d
    std::vector<LayerRefs> layer_refs;

    static DenoiserModel init(const DenoiserConfig& cfg, RngStream& rng);
    std::size_t param_count() const;  // total scalar count
};

// Coordinate-derived state shared by every layer and every flow step: the
// neighbor graph, per-spot frames, the flat edge list (i-major, uniform
// arity), and the four-frame projections of all direction vectors stacked
// frame-major as a (4E x 2) block.
struct SpatialContext {
    NeighborGraph graph;
    FrameSet frames;
    std::vector<std::uint32_t> src, dst;
    std::vector<std::size_t> offsets;  // N+1, offsets[i] = i * per_spot
    Tensor2 projected;                 // (4E) x 2
    bool any_degenerate = false;
};

SpatialContext build_spatial_context(const Tensor2& coords, std::size_t k);

// Eval-mode frame-averaged pair encodings for one layer: E x d.
Tensor2 fa_pair_encode(const SpatialContext& ctx, const DenoiserModel& model, std::size_t layer);

// Eval-mode single attention layer (unit-test surface): returns (Z', Y').
std::pair<Tensor2, Tensor2> attention_layer(const Tensor2& z, const Tensor2& yt,
                                            const SpatialContext& ctx, const Tensor2& pair_enc,
                                            const DenoiserModel& model, std::size_t layer);

// Full forward as an autodiff graph. In train mode the returned leaves are
// parallel to model.params and carry gradients after ad::backward; in eval
// mode nothing is taped and intermediates free as they fall out of scope.
struct DenoiseGraph {
    ad::NodePtr output;  // N x G
    std::vector<ad::NodePtr> param_leaves;
};

DenoiseGraph denoise_graph(const SpatialContext& ctx, const Tensor2& features, const Tensor2& yt,
                           double t, const DenoiserModel& model, bool train_mode, RngStream* rng);

// Convenience eval-mode forward from raw coordinates.
Tensor2 denoise(const Tensor2& coords, const Tensor2& features, const Tensor2& yt, double t,
                const DenoiserModel& model);

// Versioned binary checkpoint (config + named shape-headed tensors + checksum).
void save_checkpoint(const DenoiserModel& model, const std::string& path);
DenoiserModel load_checkpoint(const std::string& path);

}  // namespace slideflow
