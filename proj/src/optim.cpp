#include "slideflow/optim.hpp"

#include <cmath>

#include "slideflow/errors.hpp"

namespace slideflow {

double Gradients::global_norm() const {
    double sq = 0.0;
    for (const Tensor2& t : tensors)
        for (double v : t.data) sq += v * v;
    return std::sqrt(sq);
}

std::string Gradients::name_of(std::size_t i) const {
    return i < names.size() ? names[i] : "param[" + std::to_string(i) + "]";
}

void clip_grad_norm(Gradients& grads, double max_norm) {
    require(max_norm > 0.0, "clip_grad_norm: max_norm must be positive");
    for (std::size_t i = 0; i < grads.tensors.size(); ++i)
        if (!grads.tensors[i].all_finite())
            throw NumericError("clip_grad_norm: non-finite gradient in " + grads.name_of(i));
    double norm = grads.global_norm();
    // Strict slack so an already-clipped result passes through bitwise unchanged.
    if (norm <= max_norm * (1.0 + 1e-9)) return;
    double s = max_norm / norm;
    for (Tensor2& t : grads.tensors) scale_inplace(t, s);
}

AdamState AdamState::init(std::span<const Tensor2> params, double lr) {
    require(lr >= 0.0, "AdamState: learning rate must be non-negative");
    AdamState s;
    s.lr = lr;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Tensor2& p : params) {
        s.m.emplace_back(p.rows, p.cols);
        s.v.emplace_back(p.rows, p.cols);
    }
    return s;
}

void adam_step(std::vector<Tensor2>& params, const Gradients& grads, AdamState& state) {
    require(params.size() == grads.tensors.size() && params.size() == state.m.size(),
            "adam_step: parameter/gradient/state lists must be parallel");
    state.step += 1;
    double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor2& p = params[i];
        const Tensor2& g = grads.tensors[i];
        require_shape(p.same_shape(g) && p.same_shape(state.m[i]),
                      "adam_step: shape mismatch at " + grads.name_of(i));
        Tensor2& m = state.m[i];
        Tensor2& v = state.v[i];
        for (std::size_t j = 0; j < p.data.size(); ++j) {
            m.data[j] = state.beta1 * m.data[j] + (1.0 - state.beta1) * g.data[j];
            v.data[j] = state.beta2 * v.data[j] + (1.0 - state.beta2) * g.data[j] * g.data[j];
            double mhat = m.data[j] / b1t;
            double vhat = v.data[j] / b2t;
            p.data[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace slideflow
