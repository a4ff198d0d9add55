#ifndef ESKEW_EM_HPP
#define ESKEW_EM_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "eskew/esn.hpp"

namespace eskew {

/// Parameters of the two-group common-(Σ, δ) ESN model in latent-regression
/// form; τ is a fixed input of the fit, never estimated.
struct Theta {
    Eigen::VectorXd xi1;
    Eigen::VectorXd xi2;
    Eigen::MatrixXd Sigma;
    Eigen::VectorXd delta;
    double tau = 0.0;
};

/// Two independent training samples, one matrix per group, observations in
/// rows.
struct TrainingData {
    Eigen::MatrixXd y1;
    Eigen::MatrixXd y2;

    /// \throws std::invalid_argument unless both groups have at least d+2
    ///         observations of matching dimension
    TrainingData(Eigen::MatrixXd y1, Eigen::MatrixXd y2);

    int dim() const { return static_cast<int>(y1.cols()); }
    int n1() const { return static_cast<int>(y1.rows()); }
    int n2() const { return static_cast<int>(y2.rows()); }
};

/// Per-observation conditional moments of the latent selection variable,
/// E[U | y] and E[U² | y], one entry per training row, plus the τ they were
/// computed under.
struct EStepMoments {
    Eigen::VectorXd u_hat_1;
    Eigen::VectorXd u_hat_2;
    Eigen::VectorXd u2_hat_1;
    Eigen::VectorXd u2_hat_2;
    double tau = 0.0;
};

/// Result of fit(): final parameters, iteration count, and the observed
/// log-likelihood trace (one entry per completed EM cycle, starting with the
/// value at the initializer).
struct FitResult {
    Theta theta;
    int iterations = 0;
    std::vector<double> loglik_trace;
};

/// Per-group ESN parameter view of Theta (via the δ-parametrization).
std::pair<EsnParams, EsnParams> theta_to_groups(const Theta& theta);

/// Observed-data log-likelihood Σᵢ Σⱼ log fᵢ(y_ij); the EM monotonicity
/// monitor.
double observed_loglik(const Theta& theta, const TrainingData& data);

/// E-step: for every observation, the conditional law of U given y is normal
/// with mean α = β²δ⊤Σ^{-1}(y-ξᵢ) and variance β² = (1+δ⊤Σ^{-1}δ)^{-1},
/// truncated below at -τ; the stored moments are its first two moments.
EStepMoments e_step(const Theta& theta, const TrainingData& data);

/// M-step. δ̂ is computed first (it needs only data and moments):
///   δ̂ = [Σᵢⱼ Û_ij·y_ij − Σᵢ nᵢ·Û̄ᵢ·Ȳᵢ] / [Σᵢⱼ Û²_ij − Σᵢ nᵢ·Û̄ᵢ²],
/// then ξ̂ᵢ = Ȳᵢ − δ̂·Û̄ᵢ, and Σ̂ is the pooled within-group scatter divided
/// by n₁+n₂ (a data-only quantity, identical on every call).
/// \throws std::runtime_error if the δ̂ denominator is not positive (flat
///         direction: the latent moments carry no variance)
Theta m_step(const TrainingData& data, const EStepMoments& moments);

/// Initializer: ξᵢ = Ȳᵢ, Σ = pooled scatter/(n₁+n₂) (the same normalization
/// the M-step uses, so Σ is already at its fixed point), and
/// δ = 0.1·pooled-std ⊙ sign(pooled per-coordinate skewness).
Theta init(const TrainingData& data, double tau);

/// Full EM loop from init(); stops when the relative change of the observed
/// log-likelihood drops below tol or after max_iter cycles.
/// \throws std::runtime_error (with the iteration index) if the trace turns
///         non-finite
FitResult fit(const TrainingData& data, double tau, int max_iter = 500,
              double tol = 1e-8);

}  // namespace eskew

#endif  // ESKEW_EM_HPP
