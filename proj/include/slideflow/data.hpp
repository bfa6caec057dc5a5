#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slideflow/rng.hpp"
#include "slideflow/tensor.hpp"
#include "slideflow/zinb.hpp"

namespace slideflow {

// One slide: spot coordinates, precomputed per-spot feature embeddings, and a
// gene-expression matrix. `normalized` records whether expression has been
// log1p-transformed; raw expression must be non-negative.
struct SlideData {
    std::string id;
    Tensor2 coords;      // N x 2
    Tensor2 features;    // N x d_in
    Tensor2 expression;  // N x G
    std::vector<std::string> gene_names;
    bool normalized = false;

    std::size_t spots() const { return coords.rows; }
    std::size_t genes() const { return expression.cols; }
    std::size_t feature_dim() const { return features.cols; }
    void validate() const;
};

// Binary slide container ("SLB1"): magic, little-endian u64 header
// (N, G, d_in, flags), coords/features/expression as f64, length-prefixed
// gene names, length-prefixed id, trailing FNV-1a checksum.
void save_slide(const SlideData& slide, const std::string& path);
SlideData load_slide(const std::string& path);

// CSV interop dump: header "spot_id,x,y,<gene names...>", one row per spot.
void slide_to_csv(const SlideData& slide, const std::string& path);

// Elementwise ln(1+y); rejects negative entries, sets the normalized flag.
void log1p_normalize(SlideData& slide);
Tensor2 log1p_matrix(const Tensor2& expression);

// Indices of the n genes with the largest per-gene sample variance of the
// matrix as given (callers normalize first; the evaluation pipeline passes
// log1p data). Ties break toward the smaller index; result is sorted.
std::vector<std::size_t> select_hvg(const Tensor2& expression, std::size_t n);

// Training batch: anchor spot + its m nearest spots, m = max(min_spots,
// ceil(p*N)) with p ~ Uniform(0,1). Contiguity comes from spatial proximity.
// anchor_out (optional) receives the anchor's index in the parent slide.
SlideData sample_region(const SlideData& slide, std::size_t min_spots, RngStream& rng,
                        std::size_t* anchor_out = nullptr);

struct SynthConfig {
    std::size_t spots = 1000;
    std::size_t genes = 20;
    std::size_t feature_dim = 64;
    bool grid_layout = true;    // jittered grid; false = uniform box
    double rho = 0.8;           // neighbor-coupling strength, in [0,1)
    double snr = 1.0;           // scale of the feature->signal linear map
    std::size_t neighbors = 8;  // k for the coupling graph
    // Observation noise: mu is replaced per entry by the field value, so only
    // pi (zero inflation) and phi (dispersion) act as knobs here.
    ZinbParams noise{.mu = 1.0, .phi = 4.0, .pi = 0.1};
    std::uint64_t seed = 0;
    // Replicate slides share one gene program: when nonzero, the
    // feature->gene map is drawn from this seed instead of `seed`, so slides
    // that differ in coordinates, features, and noise still express the same
    // mapping. 0 derives the map from `seed` (fully independent slide).
    std::uint64_t map_seed = 0;

    void validate() const;
};

// The noiseless spatially coupled field: solves
//   Y = (1-rho) * softplus(F * B) + rho * neighbor_mean(Y)
// to a fixed point (contraction for rho < 1). Exposed separately so tests can
// reason about the field without ZINB noise.
struct SynthField {
    Tensor2 coords;
    Tensor2 features;
    Tensor2 field;  // N x G, strictly positive
};
SynthField synth_field(const SynthConfig& cfg);

// Field plus ZINB observation noise rounded to counts (raw expression).
SlideData synth_slide(const SynthConfig& cfg);

}  // namespace slideflow
