#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "slideflow/data.hpp"
#include "slideflow/denoiser.hpp"
#include "slideflow/optim.hpp"
#include "slideflow/prior.hpp"

namespace slideflow {

struct FlowConfig {
    std::size_t steps = 5;  // refinement steps S; 1 = one-step regression
    Prior prior;
    double learning_rate = 5e-4;
    double clip_norm = 1.0;
    std::size_t epochs = 100;
    std::size_t patience = 20;
    std::uint64_t seed = 0;
    // Targets are log1p counts by default; raw counts are a config switch.
    bool log1p_targets = true;

    void validate() const;  // steps >= 1, lr >= 0, clip > 0, 1 <= patience <= epochs
};

struct TrainReport {
    std::vector<double> loss;         // per epoch, mean over steps
    std::vector<double> val_pearson;  // per epoch
    std::vector<double> seconds;      // per epoch wall-clock
    std::size_t best_epoch = 0;
};

// t*Y + (1-t)*Y0 elementwise; endpoints are exact.
Tensor2 interpolate(const Tensor2& y, const Tensor2& y0, double t);

// One optimization step on one region batch (expression already in target
// space): draw t and a prior sample, interpolate, denoise in train mode,
// backprop MSE, clip to cfg.clip_norm, apply Adam. Returns the loss.
double train_step(const SlideData& region, DenoiserModel& model, AdamState& opt,
                  const FlowConfig& cfg, RngStream& rng);

// Iterative refinement (S Euler steps along the interpolation path). The
// observer, when set, sees (s, t1, t2, Y_t1, Y_hat) before each state update.
// y0_override replaces the prior draw (used by the invariance harness).
using SampleObserver =
    std::function<void(std::size_t, double, double, const Tensor2&, const Tensor2&)>;
Tensor2 sample(const Tensor2& coords, const Tensor2& features, const DenoiserModel& model,
               const FlowConfig& cfg, RngStream& rng, const Tensor2* y0_override = nullptr,
               const SampleObserver& observer = nullptr);

// The refinement loop over an arbitrary denoiser callable: for s = 0..S-1
// with t1 = s/S, t2 = (s+1)/S, predict, return the final prediction, else
// advance Y by (Yhat - Y)(t2 - t1)/(1 - t1). sample() wraps the real model;
// tests drive this directly with oracle denoisers.
using DenoiseFn = std::function<Tensor2(const Tensor2& y_t, double t)>;
Tensor2 sample_path(Tensor2 y0, std::size_t steps, const DenoiseFn& denoiser,
                    const SampleObserver& observer = nullptr);

// Full training loop: one region per training slide per epoch (shuffled
// order), validation mean-Pearson after each epoch, early stopping, best
// checkpoint restored into the returned model. Empty val set falls back to
// validating on the training slides.
std::pair<DenoiserModel, TrainReport> fit(const std::vector<SlideData>& train,
                                          const std::vector<SlideData>& val, DenoiserModel model,
                                          const FlowConfig& cfg);

void write_train_report(const TrainReport& report, const std::string& path);

}  // namespace slideflow
