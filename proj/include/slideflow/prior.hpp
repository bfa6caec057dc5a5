#pragma once

#include <string>

#include "slideflow/tensor.hpp"
#include "slideflow/rng.hpp"
#include "slideflow/zinb.hpp"

namespace slideflow {

enum class PriorKind { zinb, gaussian, zero };

// Source distribution for the flow. The ZINB parameters are only read when
// kind == zinb; Gaussian is fixed at standard normal.
struct Prior {
    PriorKind kind = PriorKind::zinb;
    ZinbParams zinb;
};

PriorKind prior_kind_from_string(const std::string& s);  // bad name -> UsageError
std::string to_string(PriorKind k);

// rows x cols draw; ZINB counts are emitted as reals.
Tensor2 sample_prior(const Prior& prior, std::size_t rows, std::size_t cols, RngStream& rng);

}  // namespace slideflow
