#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "slideflow/bench.hpp"
#include "slideflow/errors.hpp"

namespace slideflow {

namespace {

Tensor2 apply_isometry(const Tensor2& coords, double theta, bool reflect, double tx, double ty) {
    const double c = std::cos(theta), s = std::sin(theta);
    Tensor2 out(coords.rows, 2);
    for (std::size_t i = 0; i < coords.rows; ++i) {
        double x = coords.at(i, 0);
        double y = reflect ? -coords.at(i, 1) : coords.at(i, 1);
        out.at(i, 0) = c * x - s * y + tx;
        out.at(i, 1) = s * x + c * y + ty;
    }
    return out;
}

double max_abs_diff(const Tensor2& a, const Tensor2& b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    return worst;
}

}  // namespace

InvarianceReport invariance_suite(const DenoiserModel& model, const SlideData& slide,
                                  std::size_t transforms, double tol, const FlowConfig& cfg) {
    slide.validate();
    require(tol > 0.0, "invariance_suite: tol must be positive");
    InvarianceReport report;
    report.transforms = transforms;
    report.tol = tol;

    SpatialContext probe = build_spatial_context(slide.coords, model.config.neighbors);
    if (probe.any_degenerate) {
        report.skipped = true;
        return report;
    }

    RngStream root(cfg.seed);
    RngStream prior_rng = root.split(0xF1);
    Tensor2 y0 = sample_prior(cfg.prior, slide.spots(), model.config.genes, prior_rng);
    RngStream unused(0);  // sample() ignores its rng when the prior is overridden
    Tensor2 base = sample(slide.coords, slide.features, model, cfg, unused, &y0);

    RngStream tf_rng = root.split(0xE2);
    for (std::size_t trial = 0; trial < transforms; ++trial) {
        Tensor2 moved = apply_isometry(slide.coords, tf_rng.uniform(0, 2 * 3.141592653589793),
                                       trial % 2 == 1, tf_rng.uniform(-500, 500),
                                       tf_rng.uniform(-500, 500));
        Tensor2 out = sample(moved, slide.features, model, cfg, unused, &y0);
        report.max_diff = std::max(report.max_diff, max_abs_diff(base, out));
    }

    Tensor2 stretched = slide.coords;
    for (std::size_t i = 0; i < stretched.rows; ++i) stretched.at(i, 0) *= 1.7;
    Tensor2 control = sample(stretched, slide.features, model, cfg, unused, &y0);
    report.control_diff = max_abs_diff(base, control);

    report.passed = report.max_diff < tol && report.control_diff > tol;
    return report;
}

std::uint64_t peak_rss_bytes() {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            std::uint64_t kb = 0;
            std::sscanf(line.c_str() + 6, "%lu", &kb);
            return kb * 1024;
        }
    }
    return 0;
}

void reset_peak_rss() {
    std::ofstream out("/proc/self/clear_refs");
    if (out) out << "5";  // resets VmHWM where the kernel allows it
}

std::vector<BenchRow> scaling_benchmark(const DenoiserModel& model,
                                        const std::vector<std::size_t>& spot_counts,
                                        std::size_t repeats, const FlowConfig& cfg) {
    require(repeats >= 1, "scaling_benchmark: repeats must be >= 1");
    require(std::is_sorted(spot_counts.begin(), spot_counts.end()),
            "scaling_benchmark: spot counts must be ascending");
    std::vector<BenchRow> rows;
    rows.reserve(spot_counts.size());
    for (std::size_t n : spot_counts) {
        SynthConfig sc;
        sc.spots = n;
        sc.genes = model.config.genes;
        sc.feature_dim = model.config.feature_dim;
        sc.neighbors = std::min(model.config.neighbors, n - 1);
        sc.seed = cfg.seed + n;
        SlideData slide = synth_slide(sc);

        reset_peak_rss();
        std::vector<double> times(repeats);
        Tensor2 first;
        for (std::size_t r = 0; r < repeats; ++r) {
            RngStream rng(cfg.seed);  // identical draw per repeat: outputs must match
            auto t0 = std::chrono::steady_clock::now();
            Tensor2 pred = sample(slide.coords, slide.features, model, cfg, rng);
            times[r] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (r == 0)
                first = std::move(pred);
            else
                require(pred.data == first.data,
                        "scaling_benchmark: nondeterministic predictions across repeats");
        }
        std::sort(times.begin(), times.end());
        BenchRow row;
        row.spots = n;
        row.median_seconds = times[repeats / 2];
        row.peak_bytes = peak_rss_bytes();
        rows.push_back(row);
    }
    return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("bench: cannot open '" + path + "' for writing");
    out << "n_spots,median_seconds,peak_bytes\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%lu\n", r.spots, r.median_seconds,
                      static_cast<unsigned long>(r.peak_bytes));
        out << buf;
    }
    if (!out) throw DataError("bench: write failed for '" + path + "'");
}

void write_bench_svg(const std::vector<BenchRow>& rows, const std::string& path) {
    require(!rows.empty(), "bench: no rows to plot");
    const double w = 640, h = 400, ml = 70, mr = 20, mt = 20, mb = 50;
    double xmax = static_cast<double>(rows.back().spots);
    double ymax = 0;
    for (const auto& r : rows) ymax = std::max(ymax, r.median_seconds);
    if (ymax <= 0) ymax = 1;

    auto px = [&](double n) { return ml + (w - ml - mr) * (n / xmax); };
    auto py = [&](double s) { return h - mb - (h - mt - mb) * (s / ymax); };

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("bench: cannot open '" + path + "' for writing");
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
           "viewBox=\"0 0 640 400\">\n"
        << "  <rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "  <line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  ml, h - mb, w - mr, h - mb);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "  <line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                  ml, mt, ml, h - mb);
    out << buf;
    out << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(static_cast<double>(r.spots)),
                      py(r.median_seconds));
        out << buf;
    }
    out << "\"/>\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "  <circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"#1f77b4\"/>\n",
                      px(static_cast<double>(r.spots)), py(r.median_seconds));
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"11\" text-anchor=\"middle\">%zu"
                      "</text>\n",
                      px(static_cast<double>(r.spots)), h - mb + 16, r.spots);
        out << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\">spots"
                  "</text>\n",
                  (ml + w - mr) / 2, h - 10);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"16\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\" "
                  "transform=\"rotate(-90 16 %.1f)\">median seconds</text>\n",
                  (mt + h - mb) / 2, (mt + h - mb) / 2);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"%.1f\" y=\"%.1f\" font-size=\"11\">max %.3fs</text>\n", ml + 6.0,
                  mt + 12.0, ymax);
    out << buf;
    out << "</svg>\n";
    if (!out) throw DataError("bench: write failed for '" + path + "'");
}

}  // namespace slideflow
