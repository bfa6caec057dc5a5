#pragma once

#include <vector>

#include "slideflow/rng.hpp"

namespace slideflow {

// Zero-inflated negative binomial: with probability pi the count is a
// structural zero, otherwise NB with mean mu and dispersion phi.
//   P(y) = pi * [y = 0] + (1 - pi) * NB(y; mu, phi)
struct ZinbParams {
    double mu = 0.2;
    double phi = 1.0;
    double pi = 0.5;
    void validate() const;  // mu > 0, phi > 0, pi in [0, 1]
};

// Plain NB log-PMF, parameterized by mean/dispersion:
//   NB(y) = Gamma(y+phi)/(Gamma(phi) y!) * (phi/(phi+mu))^phi * (mu/(phi+mu))^y
double nb_log_pmf(long long y, double mu, double phi);

double zinb_pmf(long long y, const ZinbParams& p);

// Mixture sampler: zero with prob pi, else Gamma(shape=phi, scale=mu/phi)
// rate fed to Poisson. Matches the NB marginal exactly.
std::vector<long long> zinb_sample(std::size_t n, const ZinbParams& p, RngStream& rng);
long long zinb_draw(const ZinbParams& p, RngStream& rng);

double zinb_mean(const ZinbParams& p);      // (1-pi) mu
double zinb_variance(const ZinbParams& p);  // (1-pi) mu (1 + mu/phi + pi mu)

}  // namespace slideflow
