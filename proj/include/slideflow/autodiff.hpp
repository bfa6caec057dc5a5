#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "slideflow/optim.hpp"
#include "slideflow/rng.hpp"
#include "slideflow/tensor.hpp"

namespace slideflow::ad {

// Reverse-mode tape over whole tensors. Each op stores a closure that routes
// the output gradient to its parents; evaluation under NoGradGuard records
// nothing, so intermediates are freed as soon as their last consumer runs.
struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
    Tensor2 value;
    Tensor2 grad;        // allocated lazily, zeros, same shape as value
    bool track = false;  // true if this node feeds gradients somewhere
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backward_fn;

    Tensor2& grad_ref();
};

bool grad_enabled();

// RAII: disables tape recording in scope (evaluation / sampling paths).
struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

NodePtr constant(Tensor2 v);  // never tracked
NodePtr leaf(Tensor2 v);      // tracked parameter (when grads are enabled)

NodePtr matmul(const NodePtr& a, const NodePtr& b);
// x:(N,in) w:(in,out) b:(1,out) -> x*w + b broadcast over rows.
NodePtr affine(const NodePtr& x, const NodePtr& w, const NodePtr& b);
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr hadamard(const NodePtr& a, const NodePtr& b);
NodePtr scale(const NodePtr& a, double s);
NodePtr leaky_relu(const NodePtr& x, double negative_slope);
NodePtr concat_cols(std::span<const NodePtr> parts);
NodePtr slice_cols(const NodePtr& x, std::size_t start, std::size_t len);
// out[e] = x[idx[e]]; backward scatter-adds.
NodePtr gather_rows(const NodePtr& x, std::vector<std::uint32_t> idx);
// Softmax per contiguous segment of rows. x:(E,1); offsets has nseg+1 entries,
// offsets[0]=0, offsets[nseg]=E, every segment non-empty.
NodePtr segment_softmax(const NodePtr& x, std::vector<std::size_t> offsets);
// out[e] = x[e] * w[e]; x:(E,c), w:(E,1) broadcast across the row.
NodePtr row_scale(const NodePtr& x, const NodePtr& w);
// Sum rows within segments: (E,c) -> (nseg,c).
NodePtr segment_sum(const NodePtr& x, std::vector<std::size_t> offsets);
// x is B stacked blocks of E rows; output is their per-row mean: (B*E,c)->(E,c).
NodePtr block_mean_rows(const NodePtr& x, std::size_t blocks);
// Inverted dropout: zero with prob p, survivors scaled by 1/(1-p). Identity
// when training=false or p=0.
NodePtr dropout(const NodePtr& x, double p, RngStream& rng, bool training);
NodePtr mse(const NodePtr& pred, const Tensor2& target);  // scalar (1,1)
NodePtr sum(const NodePtr& x);                            // scalar (1,1)

// Backprop from a scalar loss, then collect gradients for `params` in order.
// Parameters unreachable from the loss get zero gradients. Earlier grads on
// the graph are cleared first, so each call stands alone.
Gradients backward(const NodePtr& loss, std::span<const NodePtr> params,
                   std::span<const std::string> names = {});

}  // namespace slideflow::ad
