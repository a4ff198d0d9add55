#ifndef ESKEW_ELLIPTICAL_HPP
#define ESKEW_ELLIPTICAL_HPP

#include <Eigen/Dense>
#include <utility>

namespace eskew {

/// Elliptical density generator family. Closed set on purpose: each member
/// needs a bespoke closed form for its conditional CDF, and an open plug-in
/// surface would invite subtly wrong extensions.
struct DensityGenerator {
    enum class Kind { Normal, StudentT };

    Kind kind = Kind::Normal;
    /// Degrees of freedom; meaningful only for StudentT (must be > 0).
    double nu = 0.0;

    static DensityGenerator normal() { return {Kind::Normal, 0.0}; }
    /// \throws std::invalid_argument if nu <= 0
    static DensityGenerator student_t(double nu);
};

/// m-variate generator density h^(m)(u) evaluated at squared radius u >= 0.
///
/// Normal:    (2π)^{-m/2} e^{-u/2}
/// Student-t: Γ((m+ν)/2) / (Γ(ν/2) (πν)^{m/2}) · (1 + u/ν)^{-(m+ν)/2}
///
/// \throws std::invalid_argument for u < 0 or m < 1
double generator_density(const DensityGenerator& gen, int m, double u);

/// Univariate marginal CDF F(x; h^(1)) of the generator: Φ(x) for Normal,
/// the t_ν CDF for StudentT.
double generator_cdf1(const DensityGenerator& gen, double x);

/// CDF of the conditional (selection) variable with density
/// h_Q^(1)(w) = h^(d+1)(w² + Q) / h^(d)(Q).
///
/// Normal generators are memoryless in Q and give Φ(x). For StudentT the
/// reduction — verified by quadrature in the tests — is the CDF of a scaled
/// t with ν+d degrees of freedom and scale √((ν+Q)/(ν+d)).
///
/// \throws std::invalid_argument for Q < 0 or d < 1
double conditional_cdf(const DensityGenerator& gen, double x, double Q, int d);

/// Parameters of an extended skew-elliptical distribution.
struct EseParams {
    Eigen::VectorXd xi;     ///< location (d)
    Eigen::MatrixXd Omega;  ///< dispersion, SPD (d×d)
    Eigen::VectorXd eta;    ///< shape (d)
    double tau = 0.0;       ///< extension parameter
    DensityGenerator gen;

    /// Validates dimensions and positive definiteness; caches τ̄ and the
    /// Cholesky factor of Omega.
    ///
    /// \throws NotPositiveDefiniteError if Omega is not SPD
    EseParams(Eigen::VectorXd xi, Eigen::MatrixXd Omega, Eigen::VectorXd eta,
              double tau, DensityGenerator gen);

    int dim() const { return static_cast<int>(xi.size()); }
    double tau_bar() const { return tau_bar_; }
    const Eigen::MatrixXd& chol_omega() const { return chol_omega_; }
    double log_det_omega() const { return log_det_omega_; }

private:
    double tau_bar_ = 0.0;
    Eigen::MatrixXd chol_omega_;
    double log_det_omega_ = 0.0;
};

/// ESE density at y:
///   |Ω|^{-1/2} / F(τ; h^(1)) · h^(d)(Q) · F(η⊤(y-ξ) + τ̄; h_Q^(1)),
/// with Q = (y-ξ)⊤Ω^{-1}(y-ξ).
///
/// \throws std::invalid_argument on dimension mismatch
double ese_pdf(const EseParams& p, const Eigen::VectorXd& y);

/// Posterior selection probabilities (p₁, p₂) for two groups sharing the
/// generator and τ, given priors (π₁, π₂). Computed from the full group
/// densities, so group-specific dispersions are weighted correctly.
///
/// \throws std::invalid_argument if priors are outside the open simplex or
///         the groups disagree on generator, τ, or dimension
std::pair<double, double> ese_posterior(const EseParams& g1,
                                        const EseParams& g2,
                                        std::pair<double, double> priors,
                                        const Eigen::VectorXd& y);

/// MAP label in {1, 2}; ties (exact posterior equality) go to group 2.
/// Optional misclassification costs enter through the decision threshold:
/// assign 1 iff π₁ f₁(y) c(2|1) > π₂ f₂(y) c(1|2).
int ese_classify(const EseParams& g1, const EseParams& g2,
                 std::pair<double, double> priors, const Eigen::VectorXd& y,
                 double cost_2_given_1 = 1.0, double cost_1_given_2 = 1.0);

}  // namespace eskew

#endif  // ESKEW_ELLIPTICAL_HPP
