#include <algorithm>
#include <cmath>
#include <numeric>

#include "slideflow/data.hpp"
#include "slideflow/errors.hpp"

namespace slideflow {

Tensor2 log1p_matrix(const Tensor2& expression) {
    Tensor2 out(expression.rows, expression.cols);
    for (std::size_t i = 0; i < expression.size(); ++i) {
        require(expression.data[i] >= 0.0, "log1p_normalize: negative entry");
        out.data[i] = std::log1p(expression.data[i]);
    }
    return out;
}

void log1p_normalize(SlideData& slide) {
    require(!slide.normalized, "log1p_normalize: slide '" + slide.id + "' already normalized");
    slide.expression = log1p_matrix(slide.expression);
    slide.normalized = true;
}

std::vector<std::size_t> select_hvg(const Tensor2& expression, std::size_t n) {
    require(expression.rows >= 2, "select_hvg: need at least 2 spots");
    require(expression.cols >= n,
            "select_hvg: asked for " + std::to_string(n) + " genes out of " +
                std::to_string(expression.cols));
    std::vector<double> var(expression.cols, 0.0);
    for (std::size_t g = 0; g < expression.cols; ++g) {
        double mean = 0;
        for (std::size_t i = 0; i < expression.rows; ++i) mean += expression.at(i, g);
        mean /= static_cast<double>(expression.rows);
        double ss = 0;
        for (std::size_t i = 0; i < expression.rows; ++i) {
            double d = expression.at(i, g) - mean;
            ss += d * d;
        }
        var[g] = ss / static_cast<double>(expression.rows - 1);
    }
    std::vector<std::size_t> order(expression.cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return var[a] > var[b];  // stable sort keeps ascending-index tie-break
    });
    order.resize(n);
    std::sort(order.begin(), order.end());
    return order;
}

SlideData sample_region(const SlideData& slide, std::size_t min_spots, RngStream& rng,
                        std::size_t* anchor_out) {
    slide.validate();
    const std::size_t n = slide.spots();
    double p = rng.uniform(0.0, 1.0);
    std::size_t m = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    m = std::clamp(std::max(m, min_spots), std::size_t{2}, n);

    std::size_t anchor = rng.index(n);
    if (anchor_out) *anchor_out = anchor;
    std::vector<std::pair<double, std::size_t>> by_dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        double dx = slide.coords.at(i, 0) - slide.coords.at(anchor, 0);
        double dy = slide.coords.at(i, 1) - slide.coords.at(anchor, 1);
        by_dist[i] = {dx * dx + dy * dy, i};
    }
    by_dist[anchor].first = -1.0;  // the anchor is in the region even under coordinate ties
    std::partial_sort(by_dist.begin(), by_dist.begin() + static_cast<std::ptrdiff_t>(m),
                      by_dist.end());
    std::vector<std::size_t> keep(m);
    for (std::size_t i = 0; i < m; ++i) keep[i] = by_dist[i].second;
    std::sort(keep.begin(), keep.end());  // preserve the slide's spot order

    SlideData out;
    out.id = slide.id;
    out.gene_names = slide.gene_names;
    out.normalized = slide.normalized;
    out.coords = Tensor2(m, 2);
    out.features = Tensor2(m, slide.feature_dim());
    out.expression = Tensor2(m, slide.genes());
    for (std::size_t i = 0; i < m; ++i) {
        std::copy_n(slide.coords.row_ptr(keep[i]), 2, out.coords.row_ptr(i));
        std::copy_n(slide.features.row_ptr(keep[i]), slide.feature_dim(), out.features.row_ptr(i));
        std::copy_n(slide.expression.row_ptr(keep[i]), slide.genes(), out.expression.row_ptr(i));
    }
    return out;
}

}  // namespace slideflow
