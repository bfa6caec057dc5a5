#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slideflow/data.hpp"
#include "slideflow/flow.hpp"

namespace slideflow {

struct InvarianceReport {
    bool skipped = false;  // degenerate slide: frames are not well-defined
    std::size_t transforms = 0;
    double tol = 0.0;
    double max_diff = 0.0;      // worst deviation over the isometry set
    double control_diff = 0.0;  // deviation under a non-uniform scaling
    bool passed = false;        // max_diff < tol AND control_diff > tol
};

// Reruns sample() under random rotation/reflection/translation compositions
// of the coordinates, holding the prior draw fixed, and compares outputs.
// The non-uniform scaling arm is a negative control: it must move the output.
InvarianceReport invariance_suite(const DenoiserModel& model, const SlideData& slide,
                                  std::size_t transforms, double tol, const FlowConfig& cfg);

struct BenchRow {
    std::size_t spots = 0;
    double median_seconds = 0.0;
    std::uint64_t peak_bytes = 0;
};

// For each N: build a synthetic slide, run sample() `repeats` times, record
// median wall-clock and peak resident memory. Outputs across repeats are
// checked bit-identical (timings vary; predictions must not).
std::vector<BenchRow> scaling_benchmark(const DenoiserModel& model,
                                        const std::vector<std::size_t>& spot_counts,
                                        std::size_t repeats, const FlowConfig& cfg);

void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path);
void write_bench_svg(const std::vector<BenchRow>& rows, const std::string& path);

// Peak resident set of this process (VmHWM), in bytes. reset_peak_rss() is
// best-effort (/proc/self/clear_refs) and silently does nothing if refused.
std::uint64_t peak_rss_bytes();
void reset_peak_rss();

}  // namespace slideflow
