#include "slideflow/prior.hpp"

#include "slideflow/errors.hpp"

namespace slideflow {

PriorKind prior_kind_from_string(const std::string& s) {
    if (s == "zinb") return PriorKind::zinb;
    if (s == "gaussian") return PriorKind::gaussian;
    if (s == "zero") return PriorKind::zero;
    throw UsageError("unknown prior '" + s + "' (expected zinb|gaussian|zero)");
}

std::string to_string(PriorKind k) {
    switch (k) {
        case PriorKind::zinb: return "zinb";
        case PriorKind::gaussian: return "gaussian";
        case PriorKind::zero: return "zero";
    }
    return "?";
}

Tensor2 sample_prior(const Prior& prior, std::size_t rows, std::size_t cols, RngStream& rng) {
    require(rows >= 1 && cols >= 1, "sample_prior: rows and cols must be at least 1");
    Tensor2 out(rows, cols);
    switch (prior.kind) {
        case PriorKind::zero:
            break;
        case PriorKind::gaussian:
            for (double& v : out.data) v = rng.normal();
            break;
        case PriorKind::zinb:
            prior.zinb.validate();
            for (double& v : out.data) v = static_cast<double>(zinb_draw(prior.zinb, rng));
            break;
    }
    return out;
}

}  // namespace slideflow
