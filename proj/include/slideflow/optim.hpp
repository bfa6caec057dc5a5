#pragma once

#include <span>
#include <string>
#include <vector>

#include "slideflow/tensor.hpp"

namespace slideflow {

// Per-parameter gradients, parallel to the parameter list that produced them.
// Names are carried along purely so numeric failures can say which tensor blew up.
struct Gradients {
    std::vector<Tensor2> tensors;
    std::vector<std::string> names;  // may be empty; else parallel to tensors

    double global_norm() const;
    std::string name_of(std::size_t i) const;
};

// Global-norm gradient clipping. No-op (bitwise) when the norm is already
// within max_norm; otherwise every tensor is scaled by max_norm / norm.
// Non-finite gradient entries raise NumericError naming the parameter.
void clip_grad_norm(Gradients& grads, double max_norm);

struct AdamState {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;           // completed steps
    std::vector<Tensor2> m, v;        // first/second moment, parallel to params

    static AdamState init(std::span<const Tensor2> params, double lr);
};

// One Adam update with bias correction. params/grads/state must be parallel.
void adam_step(std::vector<Tensor2>& params, const Gradients& grads, AdamState& state);

}  // namespace slideflow
