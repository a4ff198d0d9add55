#ifndef ESKEW_DISCRIMINANT_HPP
#define ESKEW_DISCRIMINANT_HPP

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "eskew/esn.hpp"

namespace eskew {

/// Classification rules exposed by the library and the CLI.
enum class RuleKind { esn_exact, esn_linear, cn_linear, ldf, qdf };

/// A pair of ESN populations with priors. The extension parameter τ must be
/// shared; dispersion and shape may differ unless a homoscedastic rule is
/// requested.
struct GroupPair {
    EsnParams g1;
    EsnParams g2;
    std::pair<double, double> priors{0.5, 0.5};

    /// \throws std::invalid_argument if τ differs, dimensions differ, or the
    ///         priors are outside the open simplex
    GroupPair(EsnParams g1, EsnParams g2, std::pair<double, double> priors);

    int dim() const { return g1.dim(); }
    bool homoscedastic() const;  // shared Ω and η (to 1e-12 relative)
};

/// Linear discriminant score a⊤y + b with decision threshold gamma, plus the
/// induced univariate laws of the score under each population.
struct LinearRule {
    Eigen::VectorXd a;
    double b = 0.0;
    std::optional<double> gamma;  ///< unset until chosen/optimized
    EsnParams law1;               ///< law of a⊤Y+b under Π₁
    EsnParams law2;               ///< law of a⊤Y+b under Π₂
};

/// Heteroscedastic normal (quadratic) discriminant:
/// ½[(y-ξ₂)⊤Ω₂^{-1}(y-ξ₂) − (y-ξ₁)⊤Ω₁^{-1}(y-ξ₁)] + ½·log(|Ω₂|/|Ω₁|).
double psi_n(const GroupPair& gp, const Eigen::VectorXd& y);

/// Homoscedastic normal linear discriminant (ξ₁-ξ₂)⊤Ω^{-1}(y - ξ̄).
/// \throws std::invalid_argument if the dispersions differ
double psi_l(const GroupPair& gp, const Eigen::VectorXd& y);

/// Exact ESN discriminant
/// Ψ_N(y) + log Φ(η₁⊤(y-ξ₁)+τ̄₁) − log Φ(η₂⊤(y-ξ₂)+τ̄₂);
/// equals log f₁(y) − log f₂(y).
double psi_esn(const GroupPair& gp, const Eigen::VectorXd& y);

/// First-order (in the Φ-argument) linear approximation of the ESN rule for
/// homoscedastic groups:
///   a = [Ω^{-1} − ζ₂(τ̄)ηη⊤](ξ₁-ξ₂),  b = −a⊤ξ̄ − ζ₁(τ̄)η⊤(ξ₁-ξ₂).
/// Returned with gamma unset; the induced score laws are attached.
/// \throws std::invalid_argument on heteroscedastic input
LinearRule psi_esn_linear(const GroupPair& gp);

/// First-order approximation of the conditional-normal rule for
/// homoscedastic groups:
///   ã = [Σ^{-1} + (1+ζ₂(τ̄))ηη⊤](ξ₁-ξ₂)
///   b̃ = −ã⊤ξ̄ + (ζ₁(τ̄)+τ̄ζ₂(τ̄))η⊤(ξ₁-ξ₂)
///        + ½(1+ζ₂(τ̄))(η⊤(ξ₁-ξ₂))²(π₁-π₂).
/// Returned with gamma unset.
/// \throws std::invalid_argument on heteroscedastic input
LinearRule psi_cn_linear(const GroupPair& gp);

/// Exact conditional-normal discriminant: the normal discriminant of the
/// conditional laws Y | U, with the unobserved latent moments replaced by
/// their prior-mixture conditional expectations,
///   Ψ₀(y) − {δ₂⊤Σ₂^{-1}(y-ξ₂) − δ₁⊤Σ₁^{-1}(y-ξ₁)}·M₁(y)
///        + ½{δ₂⊤Σ₂^{-1}δ₂ − δ₁⊤Σ₁^{-1}δ₁}·M₂(y),
/// where Ψ₀ is the Σ-based quadratic discriminant and M₁, M₂ are the
/// prior-weighted first/second truncated-normal moments of U | Y = y.
double psi_cn_exact(const GroupPair& gp, const Eigen::VectorXd& y);

/// Separation index between homoscedastic ESN populations:
/// Δ² − ζ₂(τ̄)(η⊤(ξ₁-ξ₂))², Δ² = (ξ₁-ξ₂)⊤Ω^{-1}(ξ₁-ξ₂). Equals the gap
/// ξ_{a1} − ξ_{a2} of the induced score laws of psi_esn_linear.
/// \throws std::invalid_argument on heteroscedastic input
double d12(const GroupPair& gp);

/// Label by a finalized linear rule: 1 iff a⊤y + b > γ, ties to 2.
/// \throws std::logic_error if gamma is unset
int classify_linear(const LinearRule& rule, const Eigen::VectorXd& y);

/// Label by an exact-threshold rule (threshold log(π₂/π₁)): 1 iff the
/// discriminant exceeds it, ties to 2. Supported kinds: esn_exact (Ψ_ESN),
/// qdf (Ψ_N), ldf (Ψ_L).
/// \throws std::invalid_argument for the linear-approximation kinds
int classify_exact(const GroupPair& gp, const Eigen::VectorXd& y,
                   RuleKind kind);

}  // namespace eskew

#endif  // ESKEW_DISCRIMINANT_HPP
