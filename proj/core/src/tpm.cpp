#include "eskew/tpm.hpp"

#include <cmath>
#include <stdexcept>

#include "eskew/numeric.hpp"

namespace eskew {

namespace {

// P(score <= gamma) under one induced ESN1 law.
double score_cdf(const EsnParams& law, double tau, double gamma) {
    const double root_omega = std::sqrt(law.Omega()(0, 0));
    const double rho = -law.delta()(0) / root_omega;
    if (std::abs(rho) >= 1.0 - 1e-12) {
        throw std::invalid_argument(
            "tpm: induced-law correlation is degenerate (|corr| within 1e-12 "
            "of 1)");
    }
    const double z = (gamma - law.xi()(0)) / root_omega;
    return bvn_cdf(tau, z, rho) / norm_cdf(tau);
}

}  // namespace

double tpm(const LinearRule& rule, const GroupPair& gp, double gamma) {
    const auto [pi1, pi2] = gp.priors;
    const double tau = gp.g1.tau();
    const double miss1 = score_cdf(rule.law1, tau, gamma);
    const double hit2 = score_cdf(rule.law2, tau, gamma);
    return pi1 * miss1 + pi2 * (1.0 - hit2);
}

double optimize_gamma(const LinearRule& rule, const GroupPair& gp) {
    const auto [pi1, pi2] = gp.priors;
    const double tau = gp.g1.tau();
    const auto [mean1, var1] = mean_var(rule.law1);
    const auto [mean2, var2] = mean_var(rule.law2);
    (void)tau;
    const double m = pi1 * mean1(0) + pi2 * mean2(0);
    const double second_moment =
        pi1 * (var1(0, 0) + mean1(0) * mean1(0)) +
        pi2 * (var2(0, 0) + mean2(0) * mean2(0));
    const double s = std::sqrt(second_moment - m * m);
    const double lo = m - 10.0 * s;
    const double hi = m + 10.0 * s;
    return golden_section_min(
        [&](double gamma) { return tpm(rule, gp, gamma); }, lo, hi, 1e-8);
}

}  // namespace eskew
