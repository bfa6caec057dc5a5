#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slideflow/data.hpp"
#include "slideflow/denoiser.hpp"
#include "slideflow/flow.hpp"
#include "slideflow/prior.hpp"

namespace slideflow::cli {

// Everything a run can be told, resolved as defaults <- config file <- flags.
// denoiser.genes / denoiser.feature_dim of 0 mean "infer from the data".
struct RunConfig {
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    bool force = false;  // invocation safety flag; never written to the sidecar

    DenoiserConfig denoiser;
    FlowConfig flow;
    SynthConfig synth;

    std::size_t replicates = 3;           // synth.replicates
    std::size_t val_count = 1;            // train.val_count: last n slides validate
    std::size_t hvg_count = 50;           // eval.hvg
    std::string predict_format = "slb1";  // predict.format: slb1 | csv
    std::vector<std::size_t> ablate_steps{1, 2, 5, 10, 16};
    std::vector<PriorKind> ablate_priors{PriorKind::zinb};
    std::vector<std::size_t> bench_spots{1000, 2000, 4000, 8000, 16000};
    std::size_t bench_repeats = 3;

    std::string data_dir;     // io.data_dir
    std::string checkpoint;   // io.checkpoint
    std::string slide;        // io.slide
    std::string truth;        // io.truth
    std::string predictions;  // io.predictions
    std::string out;          // io.out

    // Pushes the global seed into the nested configs that carry their own.
    void finalize();
};

// Applies one key=value pair; unknown keys and malformed values -> UsageError.
void apply_config_entry(RunConfig& rc, const std::string& key, const std::string& value);

// Parses a flat key=value file over `base`. Full-line # comments and blank
// lines are ignored; values may contain spaces and '#'. Last duplicate wins.
RunConfig load_config_file(const std::string& path, RunConfig base);

// Renders every known key in a fixed order. Feeding the result back through
// load_config_file reproduces the configuration exactly.
std::string render_config(const RunConfig& rc, const std::string& command);

void write_effective_config(const RunConfig& rc, const std::string& command,
                            const std::string& path);

}  // namespace slideflow::cli
