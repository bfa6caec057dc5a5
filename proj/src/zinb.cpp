#include "slideflow/zinb.hpp"

#include <cmath>

#include "slideflow/errors.hpp"

namespace slideflow {

void ZinbParams::validate() const {
    require(mu > 0.0, "ZinbParams: mu must be positive");
    require(phi > 0.0, "ZinbParams: phi must be positive");
    require(pi >= 0.0 && pi <= 1.0, "ZinbParams: pi must lie in [0, 1]");
}

double nb_log_pmf(long long y, double mu, double phi) {
    require(y >= 0, "nb_log_pmf: y must be non-negative");
    double yd = static_cast<double>(y);
    return std::lgamma(yd + phi) - std::lgamma(phi) - std::lgamma(yd + 1.0) +
           phi * std::log(phi / (phi + mu)) + yd * std::log(mu / (phi + mu));
}

double zinb_pmf(long long y, const ZinbParams& p) {
    p.validate();
    require(y >= 0, "zinb_pmf: y must be non-negative");
    double nb = p.pi < 1.0 ? std::exp(nb_log_pmf(y, p.mu, p.phi)) : 0.0;
    return (y == 0 ? p.pi : 0.0) + (1.0 - p.pi) * nb;
}

long long zinb_draw(const ZinbParams& p, RngStream& rng) {
    if (rng.uniform() < p.pi) return 0;
    double rate = rng.gamma(p.phi, p.mu / p.phi);
    return rng.poisson(rate);
}

std::vector<long long> zinb_sample(std::size_t n, const ZinbParams& p, RngStream& rng) {
    p.validate();
    require(n >= 1, "zinb_sample: n must be at least 1");
    std::vector<long long> out(n);
    for (auto& v : out) v = zinb_draw(p, rng);
    return out;
}

double zinb_mean(const ZinbParams& p) { return (1.0 - p.pi) * p.mu; }

double zinb_variance(const ZinbParams& p) {
    return (1.0 - p.pi) * p.mu * (1.0 + p.mu / p.phi + p.pi * p.mu);
}

}  // namespace slideflow
