#include "slideflow/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "slideflow/errors.hpp"

namespace slideflow::ad {

namespace {

thread_local bool g_grad_enabled = true;

bool any_tracked(std::span<const NodePtr> parents) {
    return std::any_of(parents.begin(), parents.end(),
                       [](const NodePtr& p) { return p && p->track; });
}

// Attach tape info only when a tracked parent exists and grads are on; in
// no-grad mode the closure (and the parent refs it captured) is discarded.
NodePtr make(Tensor2 value, std::vector<NodePtr> parents, std::function<void(Node&)> fn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    if (g_grad_enabled && any_tracked(parents)) {
        n->track = true;
        n->parents = std::move(parents);
        n->backward_fn = std::move(fn);
    }
    return n;
}

void accumulate(const NodePtr& p, const Tensor2& g) {
    if (p->track) add_inplace(p->grad_ref(), g);
}

}  // namespace

Tensor2& Node::grad_ref() {
    if (grad.size() != value.size()) grad = Tensor2(value.rows, value.cols);
    return grad;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

NodePtr constant(Tensor2 v) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    return n;
}

NodePtr leaf(Tensor2 v) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    n->track = g_grad_enabled;
    return n;
}

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
    Tensor2 v = slideflow::matmul(a->value, b->value);
    return make(std::move(v), {a, b}, [a, b](Node& self) {
        if (a->track) add_inplace(a->grad_ref(), matmul_nt(self.grad, b->value));
        if (b->track) add_inplace(b->grad_ref(), matmul_tn(a->value, self.grad));
    });
}

NodePtr affine(const NodePtr& x, const NodePtr& w, const NodePtr& b) {
    require_shape(b->value.rows == 1 && b->value.cols == w->value.cols,
                  "affine: bias must be 1x" + std::to_string(w->value.cols));
    Tensor2 v = slideflow::matmul(x->value, w->value);
    for (std::size_t r = 0; r < v.rows; ++r)
        for (std::size_t c = 0; c < v.cols; ++c) v.at(r, c) += b->value.at(0, c);
    return make(std::move(v), {x, w, b}, [x, w, b](Node& self) {
        if (x->track) add_inplace(x->grad_ref(), matmul_nt(self.grad, w->value));
        if (w->track) add_inplace(w->grad_ref(), matmul_tn(x->value, self.grad));
        if (b->track) add_inplace(b->grad_ref(), col_sum(self.grad));
    });
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
    return make(slideflow::add(a->value, b->value), {a, b}, [a, b](Node& self) {
        accumulate(a, self.grad);
        accumulate(b, self.grad);
    });
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
    return make(slideflow::sub(a->value, b->value), {a, b}, [a, b](Node& self) {
        accumulate(a, self.grad);
        if (b->track) axpy_inplace(b->grad_ref(), -1.0, self.grad);
    });
}

NodePtr hadamard(const NodePtr& a, const NodePtr& b) {
    return make(slideflow::hadamard(a->value, b->value), {a, b}, [a, b](Node& self) {
        if (a->track) add_inplace(a->grad_ref(), slideflow::hadamard(self.grad, b->value));
        if (b->track) add_inplace(b->grad_ref(), slideflow::hadamard(self.grad, a->value));
    });
}

NodePtr scale(const NodePtr& a, double s) {
    return make(scaled(a->value, s), {a}, [a, s](Node& self) {
        if (a->track) axpy_inplace(a->grad_ref(), s, self.grad);
    });
}

NodePtr leaky_relu(const NodePtr& x, double negative_slope) {
    Tensor2 v = x->value;
    for (double& e : v.data)
        if (e < 0.0) e *= negative_slope;
    return make(std::move(v), {x}, [x, negative_slope](Node& self) {
        if (!x->track) return;
        Tensor2& gx = x->grad_ref();
        for (std::size_t i = 0; i < gx.data.size(); ++i) {
            double d = x->value.data[i] > 0.0 ? 1.0 : negative_slope;
            gx.data[i] += d * self.grad.data[i];
        }
    });
}

NodePtr concat_cols(std::span<const NodePtr> parts) {
    require(!parts.empty(), "concat_cols: empty part list");
    std::size_t rows = parts.front()->value.rows, cols = 0;
    for (const auto& p : parts) {
        require_shape(p->value.rows == rows, "concat_cols: row counts differ");
        cols += p->value.cols;
    }
    Tensor2 v(rows, cols);
    std::size_t off = 0;
    for (const auto& p : parts) {
        for (std::size_t r = 0; r < rows; ++r)
            std::copy_n(p->value.row_ptr(r), p->value.cols, v.row_ptr(r) + off);
        off += p->value.cols;
    }
    std::vector<NodePtr> parents(parts.begin(), parts.end());
    return make(std::move(v), parents, [parents](Node& self) {
        std::size_t off = 0;
        for (const auto& p : parents) {
            if (p->track) {
                Tensor2& gp = p->grad_ref();
                for (std::size_t r = 0; r < gp.rows; ++r)
                    for (std::size_t c = 0; c < gp.cols; ++c)
                        gp.at(r, c) += self.grad.at(r, off + c);
            }
            off += p->value.cols;
        }
    });
}

NodePtr slice_cols(const NodePtr& x, std::size_t start, std::size_t len) {
    require_shape(start + len <= x->value.cols, "slice_cols: range out of bounds");
    Tensor2 v(x->value.rows, len);
    for (std::size_t r = 0; r < v.rows; ++r)
        std::copy_n(x->value.row_ptr(r) + start, len, v.row_ptr(r));
    return make(std::move(v), {x}, [x, start, len](Node& self) {
        if (!x->track) return;
        Tensor2& gx = x->grad_ref();
        for (std::size_t r = 0; r < self.grad.rows; ++r)
            for (std::size_t c = 0; c < len; ++c)
                gx.at(r, start + c) += self.grad.at(r, c);
    });
}

NodePtr gather_rows(const NodePtr& x, std::vector<std::uint32_t> idx) {
    Tensor2 v(idx.size(), x->value.cols);
    for (std::size_t e = 0; e < idx.size(); ++e) {
        require_shape(idx[e] < x->value.rows, "gather_rows: index out of range");
        std::copy_n(x->value.row_ptr(idx[e]), v.cols, v.row_ptr(e));
    }
    return make(std::move(v), {x}, [x, idx = std::move(idx)](Node& self) {
        if (!x->track) return;
        Tensor2& gx = x->grad_ref();
        for (std::size_t e = 0; e < idx.size(); ++e) {
            double* dst = gx.row_ptr(idx[e]);
            const double* src = self.grad.row_ptr(e);
            for (std::size_t c = 0; c < gx.cols; ++c) dst[c] += src[c];
        }
    });
}

namespace {
void check_offsets(const std::vector<std::size_t>& offsets, std::size_t total) {
    require(offsets.size() >= 2 && offsets.front() == 0 && offsets.back() == total,
            "segment offsets must start at 0 and end at the row count");
    for (std::size_t i = 1; i < offsets.size(); ++i)
        require(offsets[i] > offsets[i - 1], "segments must be non-empty and ordered");
}
}  // namespace

NodePtr segment_softmax(const NodePtr& x, std::vector<std::size_t> offsets) {
    require_shape(x->value.cols == 1, "segment_softmax: expects a column vector");
    check_offsets(offsets, x->value.rows);
    Tensor2 v(x->value.rows, 1);
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
        std::size_t lo = offsets[s], hi = offsets[s + 1];
        double mx = x->value.data[lo];
        for (std::size_t e = lo + 1; e < hi; ++e) mx = std::max(mx, x->value.data[e]);
        double z = 0.0;
        for (std::size_t e = lo; e < hi; ++e) z += (v.data[e] = std::exp(x->value.data[e] - mx));
        for (std::size_t e = lo; e < hi; ++e) v.data[e] /= z;
    }
    return make(std::move(v), {x}, [x, offsets = std::move(offsets)](Node& self) {
        if (!x->track) return;
        Tensor2& gx = x->grad_ref();
        for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
            std::size_t lo = offsets[s], hi = offsets[s + 1];
            double dot = 0.0;
            for (std::size_t e = lo; e < hi; ++e) dot += self.grad.data[e] * self.value.data[e];
            for (std::size_t e = lo; e < hi; ++e)
                gx.data[e] += self.value.data[e] * (self.grad.data[e] - dot);
        }
    });
}

NodePtr row_scale(const NodePtr& x, const NodePtr& w) {
    require_shape(w->value.cols == 1 && w->value.rows == x->value.rows,
                  "row_scale: weight must be Ex1 matching x rows");
    Tensor2 v = x->value;
    for (std::size_t r = 0; r < v.rows; ++r) {
        double s = w->value.data[r];
        double* p = v.row_ptr(r);
        for (std::size_t c = 0; c < v.cols; ++c) p[c] *= s;
    }
    return make(std::move(v), {x, w}, [x, w](Node& self) {
        if (x->track) {
            Tensor2& gx = x->grad_ref();
            for (std::size_t r = 0; r < gx.rows; ++r) {
                double s = w->value.data[r];
                for (std::size_t c = 0; c < gx.cols; ++c)
                    gx.at(r, c) += s * self.grad.at(r, c);
            }
        }
        if (w->track) {
            Tensor2& gw = w->grad_ref();
            for (std::size_t r = 0; r < x->value.rows; ++r) {
                double d = 0.0;
                for (std::size_t c = 0; c < x->value.cols; ++c)
                    d += self.grad.at(r, c) * x->value.at(r, c);
                gw.data[r] += d;
            }
        }
    });
}

NodePtr segment_sum(const NodePtr& x, std::vector<std::size_t> offsets) {
    check_offsets(offsets, x->value.rows);
    std::size_t nseg = offsets.size() - 1;
    Tensor2 v(nseg, x->value.cols);
    for (std::size_t s = 0; s < nseg; ++s)
        for (std::size_t e = offsets[s]; e < offsets[s + 1]; ++e)
            for (std::size_t c = 0; c < v.cols; ++c) v.at(s, c) += x->value.at(e, c);
    return make(std::move(v), {x}, [x, offsets = std::move(offsets)](Node& self) {
        if (!x->track) return;
        Tensor2& gx = x->grad_ref();
        for (std::size_t s = 0; s + 1 < offsets.size(); ++s)
            for (std::size_t e = offsets[s]; e < offsets[s + 1]; ++e)
                for (std::size_t c = 0; c < gx.cols; ++c) gx.at(e, c) += self.grad.at(s, c);
    });
}

NodePtr block_mean_rows(const NodePtr& x, std::size_t blocks) {
    require(blocks > 0 && x->value.rows % blocks == 0,
            "block_mean_rows: row count must be a multiple of the block count");
    std::size_t rows = x->value.rows / blocks;
    double inv = 1.0 / static_cast<double>(blocks);
    Tensor2 v(rows, x->value.cols);
    for (std::size_t b = 0; b < blocks; ++b)
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < v.cols; ++c)
                v.at(r, c) += inv * x->value.at(b * rows + r, c);
    return make(std::move(v), {x}, [x, blocks, rows, inv](Node& self) {
        if (!x->track) return;
        Tensor2& gx = x->grad_ref();
        for (std::size_t b = 0; b < blocks; ++b)
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < gx.cols; ++c)
                    gx.at(b * rows + r, c) += inv * self.grad.at(r, c);
    });
}

NodePtr dropout(const NodePtr& x, double p, RngStream& rng, bool training) {
    require(p >= 0.0 && p < 1.0, "dropout: probability must lie in [0, 1)");
    if (!training || p == 0.0) return x;
    Tensor2 mask(x->value.rows, x->value.cols);
    double keep_scale = 1.0 / (1.0 - p);
    for (double& m : mask.data) m = rng.uniform() < p ? 0.0 : keep_scale;
    Tensor2 v = slideflow::hadamard(x->value, mask);
    return make(std::move(v), {x}, [x, mask = std::move(mask)](Node& self) {
        if (x->track) add_inplace(x->grad_ref(), slideflow::hadamard(self.grad, mask));
    });
}

NodePtr mse(const NodePtr& pred, const Tensor2& target) {
    require_shape(pred->value.same_shape(target), "mse: prediction/target shape mismatch");
    require(target.size() > 0, "mse: empty tensors");
    Tensor2 diff = slideflow::sub(pred->value, target);
    double n = static_cast<double>(diff.size());
    Tensor2 v(1, 1);
    for (double d : diff.data) v.data[0] += d * d;
    v.data[0] /= n;
    return make(std::move(v), {pred}, [pred, diff = std::move(diff), n](Node& self) {
        if (!pred->track) return;
        axpy_inplace(pred->grad_ref(), self.grad.data[0] * 2.0 / n, diff);
    });
}

NodePtr sum(const NodePtr& x) {
    Tensor2 v(1, 1);
    v.data[0] = sum_all(x->value);
    return make(std::move(v), {x}, [x](Node& self) {
        if (!x->track) return;
        Tensor2& gx = x->grad_ref();
        double g = self.grad.data[0];
        for (double& e : gx.data) e += g;
    });
}

Gradients backward(const NodePtr& loss, std::span<const NodePtr> params,
                   std::span<const std::string> names) {
    require(loss && loss->value.rows == 1 && loss->value.cols == 1,
            "backward: loss must be a 1x1 scalar");
    if (loss->track) {
        // Post-order DFS so reversed order visits every consumer before its inputs.
        std::vector<Node*> order;
        std::unordered_set<Node*> visited{loss.get()};
        struct Frame {
            Node* n;
            std::size_t next;
        };
        std::vector<Frame> stack{{loss.get(), 0}};
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.next < f.n->parents.size()) {
                Node* p = f.n->parents[f.next++].get();
                if (p->track && visited.insert(p).second) stack.push_back({p, 0});
            } else {
                order.push_back(f.n);
                stack.pop_back();
            }
        }
        for (Node* n : order) n->grad = Tensor2();
        loss->grad_ref().data[0] = 1.0;
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            Node* n = *it;
            n->grad_ref();  // zeros if nothing reached it (defensive)
            if (n->backward_fn) n->backward_fn(*n);
        }
    }
    Gradients out;
    out.tensors.reserve(params.size());
    for (const NodePtr& p : params) {
        if (p->grad.size() == p->value.size() && p->track)
            out.tensors.push_back(std::move(p->grad));
        else
            out.tensors.emplace_back(p->value.rows, p->value.cols);
        p->grad = Tensor2();
    }
    out.names.assign(names.begin(), names.end());
    return out;
}

}  // namespace slideflow::ad
