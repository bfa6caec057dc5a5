#include "slideflow/denoiser.hpp"

#include <cmath>
#include <numbers>

#include "slideflow/errors.hpp"
#include "slideflow/nn.hpp"

namespace slideflow {

void DenoiserConfig::validate() const {
    require(layers >= 1 && heads >= 1 && hidden >= 1 && neighbors >= 1,
            "DenoiserConfig: layers, heads, hidden, neighbors must all be at least 1");
    require(genes >= 1 && feature_dim >= 1, "DenoiserConfig: genes and feature_dim must be set");
    require(hidden % heads == 0, "DenoiserConfig: hidden must be divisible by heads");
    require(dropout >= 0.0 && dropout < 1.0, "DenoiserConfig: dropout must lie in [0, 1)");
    require(time_dim >= 2 && time_dim % 2 == 0, "DenoiserConfig: time_dim must be even and >= 2");
}

std::vector<double> time_embed(double t, std::size_t dim) {
    require(t >= 0.0 && t <= 1.0, "time_embed: t must lie in [0, 1]");
    require(dim >= 2 && dim % 2 == 0, "time_embed: dim must be even and >= 2");
    std::size_t half = dim / 2;
    std::vector<double> out(dim);
    for (std::size_t m = 0; m < half; ++m) {
        double expo = half > 1 ? static_cast<double>(m) / static_cast<double>(half - 1) : 0.0;
        double freq = std::pow(1000.0, expo);  // geometric ladder over [1, 1000]
        double w = 2.0 * std::numbers::pi_v<double> * freq * t;
        out[m] = std::sin(w);
        out[half + m] = std::cos(w);
    }
    return out;
}

namespace {

struct Builder {
    std::vector<Tensor2>& params;
    std::vector<std::string>& names;
    RngStream& rng;

    DenoiserModel::Lin lin(const std::string& name, std::size_t in, std::size_t out) {
        DenseLayer l = init_dense(in, out, rng);
        DenoiserModel::Lin ref{params.size(), params.size() + 1};
        params.push_back(std::move(l.weight));
        params.push_back(std::move(l.bias));
        names.push_back(name + ".w");
        names.push_back(name + ".b");
        return ref;
    }

    DenoiserModel::Mlp mlp(const std::string& name, std::size_t in, std::size_t hid,
                           std::size_t out) {
        return {lin(name + ".l1", in, hid), lin(name + ".l2", hid, out)};
    }
};

constexpr double kLeakySlope = 0.2;

}  // namespace

DenoiserModel DenoiserModel::init(const DenoiserConfig& cfg, RngStream& rng) {
    cfg.validate();
    DenoiserModel m;
    m.config = cfg;
    RngStream stream = rng.split(0xD1);
    Builder b{m.params, m.names, stream};
    std::size_t d = cfg.hidden, dh = d / cfg.heads, g = cfg.genes;
    m.input_proj = b.lin("input_proj", cfg.feature_dim + cfg.time_dim, d);
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        std::string p = "layer" + std::to_string(l) + ".";
        LayerRefs lr;
        lr.q = b.lin(p + "q", d, d);
        lr.k = b.lin(p + "k", d, d);
        lr.v = b.lin(p + "v", d, d);
        lr.pair_enc = b.mlp(p + "pair", 2, d, d);
        for (std::size_t h = 0; h < cfg.heads; ++h)
            lr.score.push_back(b.mlp(p + "score" + std::to_string(h), 2 * dh + d + g, d, 1));
        lr.agg = b.mlp(p + "agg", 2 * d, d, d);
        lr.expr = b.mlp(p + "expr", d, d, g);
        m.layer_refs.push_back(std::move(lr));
    }
    return m;
}

std::size_t DenoiserModel::param_count() const {
    std::size_t n = 0;
    for (const Tensor2& p : params) n += p.size();
    return n;
}

SpatialContext build_spatial_context(const Tensor2& coords, std::size_t k) {
    SpatialContext ctx;
    ctx.graph = knn_graph(coords, k);
    ctx.frames = build_frame_set(coords, ctx.graph);
    std::size_t n = ctx.graph.spot_count, per = ctx.graph.per_spot;
    std::size_t e = n * per;
    ctx.src.resize(e);
    ctx.dst.resize(e);
    ctx.offsets.resize(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        ctx.offsets[i] = i * per;
        auto nb = ctx.graph.neighbors(i);
        for (std::size_t r = 0; r < per; ++r) {
            ctx.src[i * per + r] = static_cast<std::uint32_t>(i);
            ctx.dst[i * per + r] = nb[r];
        }
    }
    ctx.offsets[n] = e;
    // Four-frame projections of every direction vector, stacked frame-major:
    // row g*E + edge holds (dir_edge - centroid_i) U_g^{(i)}.
    ctx.projected = Tensor2(4 * e, 2);
    for (std::size_t i = 0; i < n; ++i) {
        auto dirs = direction_vectors(coords, ctx.graph, i);
        const FrameEntry& fe = ctx.frames.entries[i];
        ctx.any_degenerate = ctx.any_degenerate || fe.degenerate || fe.eigen_tie;
        for (std::size_t g = 0; g < 4; ++g) {
            auto proj = project_dirs(dirs, fe.frame(g), fe.centroid);
            for (std::size_t r = 0; r < per; ++r) {
                std::size_t row = g * e + i * per + r;
                ctx.projected.at(row, 0) = proj[r][0];
                ctx.projected.at(row, 1) = proj[r][1];
            }
        }
    }
    return ctx;
}

namespace {

// Parameter access for one forward pass: leaves in train mode (tracked),
// constants in eval mode.
struct Env {
    std::vector<ad::NodePtr> leaves;

    ad::NodePtr operator[](std::size_t i) const { return leaves[i]; }

    ad::NodePtr affine(const DenoiserModel::Lin& l, const ad::NodePtr& x) const {
        return ad::affine(x, leaves[l.w], leaves[l.b]);
    }
    ad::NodePtr mlp(const DenoiserModel::Mlp& m, const ad::NodePtr& x) const {
        return affine(m.l2, ad::leaky_relu(affine(m.l1, x), kLeakySlope));
    }
};

Env make_env(const DenoiserModel& model, bool train) {
    Env env;
    env.leaves.reserve(model.params.size());
    for (const Tensor2& p : model.params)
        env.leaves.push_back(train ? ad::leaf(p) : ad::constant(p));
    return env;
}

ad::NodePtr pair_encode_node(const SpatialContext& ctx, const Env& env,
                             const DenoiserModel::LayerRefs& lr) {
    auto proj = ad::constant(ctx.projected);
    return ad::block_mean_rows(env.mlp(lr.pair_enc, proj), 4);
}

struct LayerOut {
    ad::NodePtr z;
    ad::NodePtr y;
};

LayerOut layer_step(const SpatialContext& ctx, const Env& env, const DenoiserConfig& cfg,
                    const DenoiserModel::LayerRefs& lr, const ad::NodePtr& z,
                    const ad::NodePtr& y, const ad::NodePtr& cp, bool train, RngStream* rng) {
    std::size_t dh = cfg.hidden / cfg.heads;
    auto zq_src = ad::gather_rows(env.affine(lr.q, z), ctx.src);
    auto zk_dst = ad::gather_rows(env.affine(lr.k, z), ctx.dst);
    auto zv_dst = ad::gather_rows(env.affine(lr.v, z), ctx.dst);
    auto ydiff = ad::sub(ad::gather_rows(y, ctx.src), ad::gather_rows(y, ctx.dst));

    std::vector<ad::NodePtr> agg_parts;
    ad::NodePtr att_sum;
    for (std::size_t h = 0; h < cfg.heads; ++h) {
        std::vector<ad::NodePtr> in_parts = {ad::slice_cols(zq_src, h * dh, dh),
                                             ad::slice_cols(zk_dst, h * dh, dh), cp, ydiff};
        auto score = env.mlp(lr.score[h], ad::concat_cols(in_parts));
        auto att = ad::segment_softmax(score, ctx.offsets);
        auto vh = ad::slice_cols(zv_dst, h * dh, dh);
        agg_parts.push_back(ad::segment_sum(ad::row_scale(vh, att), ctx.offsets));
        att_sum = att_sum ? ad::add(att_sum, att) : att;
    }
    // The pair encodings are shared across heads; aggregate them under the
    // head-averaged attention.
    auto abar = ad::scale(att_sum, 1.0 / static_cast<double>(cfg.heads));
    agg_parts.push_back(ad::segment_sum(ad::row_scale(cp, abar), ctx.offsets));

    auto z2 = ad::add(env.mlp(lr.agg, ad::concat_cols(agg_parts)), z);
    if (train && cfg.dropout > 0.0) z2 = ad::dropout(z2, cfg.dropout, *rng, true);
    auto y2 = env.mlp(lr.expr, z2);
    return {z2, y2};
}

}  // namespace

Tensor2 fa_pair_encode(const SpatialContext& ctx, const DenoiserModel& model, std::size_t layer) {
    require(layer < model.layer_refs.size(), "fa_pair_encode: layer index out of range");
    ad::NoGradGuard ng;
    Env env = make_env(model, false);
    return pair_encode_node(ctx, env, model.layer_refs[layer])->value;
}

std::pair<Tensor2, Tensor2> attention_layer(const Tensor2& z, const Tensor2& yt,
                                            const SpatialContext& ctx, const Tensor2& pair_enc,
                                            const DenoiserModel& model, std::size_t layer) {
    require(layer < model.layer_refs.size(), "attention_layer: layer index out of range");
    const DenoiserConfig& cfg = model.config;
    require_shape(z.rows == ctx.graph.spot_count && z.cols == cfg.hidden,
                  "attention_layer: Z must be N x hidden");
    require_shape(yt.rows == z.rows && yt.cols == cfg.genes, "attention_layer: Y must be N x genes");
    require_shape(pair_enc.rows == ctx.src.size() && pair_enc.cols == cfg.hidden,
                  "attention_layer: pair encodings must be E x hidden");
    ad::NoGradGuard ng;
    Env env = make_env(model, false);
    LayerOut out = layer_step(ctx, env, cfg, model.layer_refs[layer], ad::constant(z),
                              ad::constant(yt), ad::constant(pair_enc), false, nullptr);
    return {out.z->value, out.y->value};
}

DenoiseGraph denoise_graph(const SpatialContext& ctx, const Tensor2& features, const Tensor2& yt,
                           double t, const DenoiserModel& model, bool train_mode, RngStream* rng) {
    const DenoiserConfig& cfg = model.config;
    cfg.validate();
    std::size_t n = ctx.graph.spot_count;
    require(n >= 2, "denoise: needs at least 2 spots");
    require_shape(features.rows == n && features.cols == cfg.feature_dim,
                  "denoise: features must be N x feature_dim (" + features.shape_str() + ")");
    require_shape(yt.rows == n && yt.cols == cfg.genes,
                  "denoise: expression must be N x genes (" + yt.shape_str() + ")");
    require(!train_mode || cfg.dropout == 0.0 || rng != nullptr,
            "denoise: train mode with dropout needs an RNG");

    Env env = make_env(model, train_mode);

    // Feature || time embedding, projected to the hidden width.
    std::vector<double> emb = time_embed(t, cfg.time_dim);
    Tensor2 temb(n, cfg.time_dim);
    for (std::size_t i = 0; i < n; ++i)
        std::copy(emb.begin(), emb.end(), temb.row_ptr(i));
    std::vector<ad::NodePtr> in_parts = {ad::constant(features), ad::constant(std::move(temb))};
    auto z = env.affine(model.input_proj, ad::concat_cols(in_parts));

    auto y = ad::constant(yt);
    ad::NodePtr y_mean;
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        const auto& lr = model.layer_refs[l];
        auto cp = pair_encode_node(ctx, env, lr);
        LayerOut out = layer_step(ctx, env, cfg, lr, z, y, cp, train_mode, rng);
        z = out.z;
        y = out.y;  // thread the updated expression into the next layer
        y_mean = y_mean ? ad::add(y_mean, out.y) : out.y;
    }
    DenoiseGraph g;
    g.output = ad::scale(y_mean, 1.0 / static_cast<double>(cfg.layers));
    g.param_leaves = std::move(env.leaves);
    return g;
}

Tensor2 denoise(const Tensor2& coords, const Tensor2& features, const Tensor2& yt, double t,
                const DenoiserModel& model) {
    SpatialContext ctx = build_spatial_context(coords, model.config.neighbors);
    ad::NoGradGuard ng;
    return denoise_graph(ctx, features, yt, t, model, false, nullptr).output->value;
}

}  // namespace slideflow
