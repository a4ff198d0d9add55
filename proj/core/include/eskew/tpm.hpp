#ifndef ESKEW_TPM_HPP
#define ESKEW_TPM_HPP

#include "eskew/discriminant.hpp"

namespace eskew {

/// Total probability of misclassification of a linear rule at threshold
/// gamma:
///   π₁·P(a⊤Y+b ≤ γ | Π₁) + π₂·P(a⊤Y+b > γ | Π₂)
/// with each tail probability taken from the induced univariate ESN law,
///   P(score ≤ γ | Πᵢ) = Φ₂((τ, (γ-ξ_{ai})/√Ω_a); corr = -δ_a/√Ω_a)/Φ(τ).
///
/// \throws std::invalid_argument if the standardized correlation is within
///         1e-12 of ±1 (degenerate induced law)
double tpm(const LinearRule& rule, const GroupPair& gp, double gamma);

/// Threshold minimizing tpm over γ, by golden-section search on
/// [m - 10s, m + 10s] where m, s are the prior-weighted mixture mean and
/// standard deviation of the two induced score laws; tolerance 1e-8 on γ.
/// Unimodality is assumed, not verified.
double optimize_gamma(const LinearRule& rule, const GroupPair& gp);

}  // namespace eskew

#endif  // ESKEW_TPM_HPP
