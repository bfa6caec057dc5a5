#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "slideflow/data.hpp"
#include "slideflow/tensor.hpp"

namespace slideflow {

// Sample Pearson correlation. Vectors whose variance is below 1e-15 score 0
// (keeps gene-set means defined when a gene is constant).
double pearson(std::span<const double> x, std::span<const double> y);

struct EvalReport {
    std::vector<double> per_gene_r;  // aligned with hvg order
    double mean_r = 0.0;
    std::vector<std::string> gene_names;  // optional; filled by callers that have them
    std::size_t spot_count = 0;
};

// Per-gene Pearson across spots on the hvg column subset; mean over genes.
EvalReport evaluate(const Tensor2& pred, const Tensor2& truth,
                    const std::vector<std::size_t>& hvg);

// Feature-only comparator: per-gene ridge regression (lambda = 1e-2, bias via
// an appended ones column) from spot features to log1p expression, fitted on
// the train slides, evaluated on the test slide over the hvg subset. No
// coordinates, no neighbors — the "independent spots" contrast class.
EvalReport independent_baseline(const std::vector<SlideData>& train, const SlideData& test,
                                const std::vector<std::size_t>& hvg);

void write_eval_csv(const EvalReport& report, const std::string& path);

}  // namespace slideflow
