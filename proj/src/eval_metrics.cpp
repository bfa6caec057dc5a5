#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <fstream>

#include "slideflow/errors.hpp"
#include "slideflow/eval.hpp"

namespace slideflow {

double pearson(std::span<const double> x, std::span<const double> y) {
    require_shape(x.size() == y.size(), "pearson: length mismatch (" + std::to_string(x.size()) +
                                            " vs " + std::to_string(y.size()) + ")");
    require(x.size() >= 2, "pearson: need at least 2 samples");
    const auto n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx / n < 1e-15 || syy / n < 1e-15) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

EvalReport evaluate(const Tensor2& pred, const Tensor2& truth,
                    const std::vector<std::size_t>& hvg) {
    require_shape(pred.same_shape(truth), "evaluate: prediction " + pred.shape_str() +
                                              " vs truth " + truth.shape_str());
    EvalReport report;
    report.spot_count = pred.rows;
    report.per_gene_r.reserve(hvg.size());
    std::vector<double> a(pred.rows), b(pred.rows);
    for (std::size_t g : hvg) {
        require(g < pred.cols, "evaluate: hvg index " + std::to_string(g) + " out of range");
        for (std::size_t i = 0; i < pred.rows; ++i) {
            a[i] = pred.at(i, g);
            b[i] = truth.at(i, g);
        }
        report.per_gene_r.push_back(pearson(a, b));
    }
    double total = 0;
    for (double r : report.per_gene_r) total += r;
    report.mean_r = report.per_gene_r.empty()
                        ? 0.0
                        : total / static_cast<double>(report.per_gene_r.size());
    return report;
}

EvalReport independent_baseline(const std::vector<SlideData>& train, const SlideData& test,
                                const std::vector<std::size_t>& hvg) {
    require(!train.empty(), "independent_baseline: empty train set");
    const std::size_t d = test.feature_dim(), g = test.genes();
    std::size_t rows = 0;
    for (const auto& s : train) {
        require_shape(s.feature_dim() == d && s.genes() == g,
                      "independent_baseline: slide '" + s.id + "' shape mismatch");
        rows += s.spots();
    }

    Eigen::MatrixXd x(rows, d + 1);
    Eigen::MatrixXd y(rows, g);
    std::size_t at = 0;
    for (const auto& s : train) {
        Tensor2 target = s.normalized ? s.expression : log1p_matrix(s.expression);
        for (std::size_t i = 0; i < s.spots(); ++i, ++at) {
            for (std::size_t c = 0; c < d; ++c) x(at, c) = s.features.at(i, c);
            x(at, d) = 1.0;
            for (std::size_t c = 0; c < g; ++c) y(at, c) = target.at(i, c);
        }
    }

    const double lambda = 1e-2;
    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += lambda;
    Eigen::MatrixXd w = gram.ldlt().solve(x.transpose() * y);

    Eigen::MatrixXd xt(test.spots(), d + 1);
    for (std::size_t i = 0; i < test.spots(); ++i) {
        for (std::size_t c = 0; c < d; ++c) xt(i, c) = test.features.at(i, c);
        xt(i, d) = 1.0;
    }
    Eigen::MatrixXd p = xt * w;
    Tensor2 pred(test.spots(), g);
    for (std::size_t i = 0; i < test.spots(); ++i)
        for (std::size_t c = 0; c < g; ++c) pred.at(i, c) = p(i, c);

    Tensor2 truth = test.normalized ? test.expression : log1p_matrix(test.expression);
    EvalReport report = evaluate(pred, truth, hvg);
    for (std::size_t idx : hvg) report.gene_names.push_back(test.gene_names[idx]);
    return report;
}

void write_eval_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("eval: cannot open '" + path + "' for writing");
    out << "gene,r\n";
    char num[48];
    for (std::size_t i = 0; i < report.per_gene_r.size(); ++i) {
        const std::string& name = i < report.gene_names.size()
                                      ? report.gene_names[i]
                                      : "gene" + std::to_string(i);
        std::snprintf(num, sizeof num, "%.10g", report.per_gene_r[i]);
        out << name << ',' << num << '\n';
    }
    std::snprintf(num, sizeof num, "%.10g", report.mean_r);
    out << "__mean__," << num << '\n';
    if (!out) throw DataError("eval: write failed for '" + path + "'");
}

}  // namespace slideflow
