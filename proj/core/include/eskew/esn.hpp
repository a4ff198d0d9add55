#ifndef ESKEW_ESN_HPP
#define ESKEW_ESN_HPP

#include <Eigen/Dense>
#include <utility>

#include "eskew/numeric.hpp"
#include "eskew/rng.hpp"

namespace eskew {

/// Parameters of a d-variate extended skew-normal distribution, carrying both
/// the centered parametrization (ξ, Ω, η, τ) and the latent-regression one
/// (ξ, Σ, δ, τ) with
///   δ = Ωη / √(1 + η⊤Ωη),   Σ = Ω − δδ⊤,   τ̄ = τ·√(1 + η⊤Ωη).
///
/// Instances are immutable after construction and validated on construction:
/// both Ω and Σ must be positive definite (smallest Cholesky pivot above
/// 1e-12·trace).
class EsnParams {
public:
    /// Build from the centered parametrization (ξ, Ω, η, τ).
    /// \throws NotPositiveDefiniteError if Ω (or the derived Σ) is not SPD
    static EsnParams from_centered(Eigen::VectorXd xi, Eigen::MatrixXd Omega,
                                   Eigen::VectorXd eta, double tau);

    /// Build from the latent-regression parametrization (ξ, Σ, δ, τ):
    /// Ω = Σ + δδ⊤, η = Σ^{-1}δ / √(1 + δ⊤Σ^{-1}δ), τ̄ = τ·√(1 + δ⊤Σ^{-1}δ).
    /// \throws NotPositiveDefiniteError if Σ is not SPD
    static EsnParams from_delta(Eigen::VectorXd xi, Eigen::MatrixXd Sigma,
                                Eigen::VectorXd delta, double tau);

    int dim() const { return static_cast<int>(xi_.size()); }
    const Eigen::VectorXd& xi() const { return xi_; }
    const Eigen::MatrixXd& Omega() const { return Omega_; }
    const Eigen::VectorXd& eta() const { return eta_; }
    double tau() const { return tau_; }
    const Eigen::VectorXd& delta() const { return delta_; }
    const Eigen::MatrixXd& Sigma() const { return Sigma_; }
    double tau_bar() const { return tau_bar_; }

    const Eigen::MatrixXd& chol_omega() const { return chol_omega_; }
    const Eigen::MatrixXd& chol_sigma() const { return chol_sigma_; }
    double log_det_omega() const { return log_det_omega_; }
    /// Ω^{-1}δ (cached; used by the conditional latent law).
    const Eigen::VectorXd& omega_inv_delta() const { return omega_inv_delta_; }
    /// β = √(1 − δ⊤Ω^{-1}δ), the conditional standard deviation of U | Y.
    double beta() const { return beta_; }

private:
    EsnParams() = default;
    void finalize();  // caches, validation

    Eigen::VectorXd xi_, eta_, delta_;
    Eigen::MatrixXd Omega_, Sigma_;
    double tau_ = 0.0, tau_bar_ = 0.0, beta_ = 1.0;
    Eigen::MatrixXd chol_omega_, chol_sigma_;
    Eigen::VectorXd omega_inv_delta_;
    double log_det_omega_ = 0.0;
};

/// Scalar law of a⊤Y + b under Y ~ ESN_d, together with the projection that
/// produced it (Ω_a = a⊤Ωa, δ_a = a⊤δ, ξ_a = a⊤ξ + b).
struct AffineProjection {
    Eigen::VectorXd a;
    double b = 0.0;
    double xi_a = 0.0;
    double Omega_a = 0.0;
    double delta_a = 0.0;
    double eta_a = 0.0;
};

/// log density at y; stable down to Φ-arguments of -40 via the tail branch
/// of log_norm_cdf.
/// \throws std::invalid_argument on dimension mismatch
double log_pdf(const EsnParams& p, const Eigen::VectorXd& y);

/// Density at y (exp of log_pdf).
double pdf(const EsnParams& p, const Eigen::VectorXd& y);

/// Distribution function of a univariate ESN:
/// F(y) = Φ₂((τ, (y-ξ)/√Ω); corr = -δ/√Ω) / Φ(τ).
/// \throws std::invalid_argument unless d == 1
double cdf1(const EsnParams& p, double y);

/// n i.i.d. draws, one per row, by the exact selection representation:
/// draw X₀ ~ N(0,1), X ~ N_d(ξ, Σ) independently, accept when X₀ + τ > 0,
/// emit Y = X + δX₀. For τ < -3 the acceptance probability Φ(τ) makes
/// rejection wasteful, so X₀ is instead drawn directly from the truncated
/// normal by inverse CDF — the two paths sample the same law.
Eigen::MatrixXd sample(const EsnParams& p, RngStream& rng, int n);

/// Exact first two moments: E[Y] = ξ + ζ₁(τ)δ, Var[Y] = Ω + ζ₂(τ)δδ⊤.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> mean_var(const EsnParams& p);

/// Law of the affine image a⊤Y + b: a univariate ESN with
/// ξ_a = a⊤ξ + b, Ω_a = a⊤Ωa, δ_a = a⊤δ, η_a = Ω_a^{-1}δ_a/√(1-Ω_a^{-1}δ_a²)
/// and unchanged τ.
/// \throws std::invalid_argument if a == 0 or dimensions mismatch
std::pair<AffineProjection, EsnParams> affine(const EsnParams& p,
                                              const Eigen::VectorXd& a,
                                              double b);

/// Conditional law of the latent selection variable U given Y = y: normal
/// with mean α = δ⊤Ω^{-1}(y-ξ) and variance β² = 1 - δ⊤Ω^{-1}δ, left-
/// truncated at -τ.
/// \throws std::invalid_argument on dimension mismatch
TruncatedConditional conditional_u(const EsnParams& p,
                                   const Eigen::VectorXd& y);

}  // namespace eskew

#endif  // ESKEW_ESN_HPP
