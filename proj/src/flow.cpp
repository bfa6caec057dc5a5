#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "slideflow/autodiff.hpp"
#include "slideflow/errors.hpp"
#include "slideflow/eval.hpp"
#include "slideflow/flow.hpp"

namespace slideflow {

void FlowConfig::validate() const {
    require(steps >= 1, "flow: steps must be >= 1");
    require(learning_rate >= 0.0, "flow: learning rate must be non-negative");
    require(clip_norm > 0.0, "flow: clip norm must be positive");
    require(patience >= 1, "flow: patience must be >= 1");
    require(patience <= epochs, "flow: patience must not exceed epochs");
    require(epochs >= 1, "flow: epochs must be >= 1");
}

Tensor2 interpolate(const Tensor2& y, const Tensor2& y0, double t) {
    require_shape(y.same_shape(y0),
                  "interpolate: " + y.shape_str() + " vs " + y0.shape_str());
    require(t >= 0.0 && t <= 1.0, "interpolate: t must lie in [0, 1]");
    Tensor2 out(y.rows, y.cols);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data[i] = t * y.data[i] + (1.0 - t) * y0.data[i];
    return out;
}

double train_step(const SlideData& region, DenoiserModel& model, AdamState& opt,
                  const FlowConfig& cfg, RngStream& rng) {
    double t = rng.uniform();
    Tensor2 y0 = sample_prior(cfg.prior, region.spots(), region.genes(), rng);
    Tensor2 yt = interpolate(region.expression, y0, t);

    SpatialContext ctx = build_spatial_context(region.coords, model.config.neighbors);
    DenoiseGraph graph = denoise_graph(ctx, region.features, yt, t, model, true, &rng);
    auto loss = ad::mse(graph.output, region.expression);
    double loss_value = loss->value.at(0, 0);
    if (!std::isfinite(loss_value)) throw NumericError("train_step: non-finite loss");

    Gradients grads = ad::backward(loss, graph.param_leaves, model.names);
    clip_grad_norm(grads, cfg.clip_norm);
    adam_step(model.params, grads, opt);
    return loss_value;
}

Tensor2 sample_path(Tensor2 y0, std::size_t steps, const DenoiseFn& denoiser,
                    const SampleObserver& observer) {
    require(steps >= 1, "sample_path: steps must be >= 1");
    const auto s_total = static_cast<double>(steps);
    Tensor2 y = std::move(y0);
    for (std::size_t s = 0; s < steps; ++s) {
        double t1 = static_cast<double>(s) / s_total;
        double t2 = static_cast<double>(s + 1) / s_total;
        Tensor2 y_hat = denoiser(y, t1);
        require_shape(y_hat.same_shape(y), "sample_path: denoiser changed the state shape");
        if (observer) observer(s, t1, t2, y, y_hat);
        if (s + 1 == steps) return y_hat;
        double step_scale = (t2 - t1) / (1.0 - t1);
        for (std::size_t i = 0; i < y.size(); ++i)
            y.data[i] += (y_hat.data[i] - y.data[i]) * step_scale;
    }
    return y;  // unreachable: the loop always returns at s = steps-1
}

Tensor2 sample(const Tensor2& coords, const Tensor2& features, const DenoiserModel& model,
               const FlowConfig& cfg, RngStream& rng, const Tensor2* y0_override,
               const SampleObserver& observer) {
    cfg.validate();
    Tensor2 y0 = y0_override ? *y0_override
                             : sample_prior(cfg.prior, coords.rows, model.config.genes, rng);
    require_shape(y0.rows == coords.rows && y0.cols == model.config.genes,
                  "sample: prior state " + y0.shape_str() + " does not match N x G");

    // Graph and frames depend only on coordinates, so one context serves all
    // S denoiser calls.
    SpatialContext ctx = build_spatial_context(coords, model.config.neighbors);
    auto step = [&](const Tensor2& y_t, double t) {
        ad::NoGradGuard eval_guard;
        return denoise_graph(ctx, features, y_t, t, model, false, nullptr).output->value;
    };
    return sample_path(std::move(y0), cfg.steps, step, observer);
}

namespace {

// Mean-Pearson over genes, averaged across validation slides. The same rng
// seed is rebuilt for every epoch so the validation prior draw is fixed: a
// frozen model then scores an exactly constant metric.
double validation_pearson(const std::vector<SlideData>& val, const DenoiserModel& model,
                          const FlowConfig& cfg, std::uint64_t val_seed) {
    RngStream val_rng = RngStream(cfg.seed).split(val_seed);
    std::vector<std::size_t> all_genes(model.config.genes);
    std::iota(all_genes.begin(), all_genes.end(), 0);
    double total = 0;
    for (const auto& slide : val) {
        Tensor2 pred = sample(slide.coords, slide.features, model, cfg, val_rng);
        total += evaluate(pred, slide.expression, all_genes).mean_r;
    }
    return total / static_cast<double>(val.size());
}

}  // namespace

std::pair<DenoiserModel, TrainReport> fit(const std::vector<SlideData>& train,
                                          const std::vector<SlideData>& val, DenoiserModel model,
                                          const FlowConfig& cfg) {
    cfg.validate();
    require(!train.empty(), "fit: empty train set");

    auto prepare = [&](const std::vector<SlideData>& slides) {
        std::vector<SlideData> out;
        out.reserve(slides.size());
        for (const auto& s : slides) {
            s.validate();
            require_shape(s.feature_dim() == model.config.feature_dim &&
                              s.genes() == model.config.genes,
                          "fit: slide '" + s.id + "' does not match the model (features " +
                              std::to_string(s.feature_dim()) + "/" +
                              std::to_string(model.config.feature_dim) + ", genes " +
                              std::to_string(s.genes()) + "/" +
                              std::to_string(model.config.genes) + ")");
            out.push_back(s);
            if (cfg.log1p_targets && !out.back().normalized) log1p_normalize(out.back());
        }
        return out;
    };
    std::vector<SlideData> train_set = prepare(train);
    std::vector<SlideData> val_set = prepare(val.empty() ? train : val);

    RngStream root(cfg.seed);
    RngStream train_rng = root.split(0x7EA1);
    AdamState opt = AdamState::init(model.params, cfg.learning_rate);
    const std::size_t min_spots = model.config.neighbors + 1;

    TrainReport report;
    DenoiserModel best = model;
    double best_metric = -2.0;  // below any Pearson mean
    std::size_t since_best = 0;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[train_rng.index(i)]);

        double epoch_loss = 0;
        for (std::size_t step = 0; step < order.size(); ++step) {
            SlideData region = sample_region(train_set[order[step]], min_spots, train_rng);
            try {
                epoch_loss += train_step(region, model, opt, cfg, train_rng);
            } catch (const NumericError& e) {
                throw NumericError("fit: epoch " + std::to_string(epoch) + " step " +
                                   std::to_string(step) + ": " + e.what());
            }
        }
        epoch_loss /= static_cast<double>(order.size());

        double metric = validation_pearson(val_set, model, cfg, 0x7E57);
        report.loss.push_back(epoch_loss);
        report.val_pearson.push_back(metric);
        report.seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

        if (metric > best_metric) {
            best_metric = metric;
            best = model;
            report.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    return {std::move(best), std::move(report)};
}

void write_train_report(const TrainReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("train report: cannot open '" + path + "' for writing");
    out << "epoch,loss,val_pearson,seconds\n";
    char row[160];
    for (std::size_t e = 0; e < report.loss.size(); ++e) {
        std::snprintf(row, sizeof row, "%zu,%.10g,%.10g,%.6f\n", e, report.loss[e],
                      report.val_pearson[e], report.seconds[e]);
        out << row;
    }
    if (!out) throw DataError("train report: write failed for '" + path + "'");
}

}  // namespace slideflow
