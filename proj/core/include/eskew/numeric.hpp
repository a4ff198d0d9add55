#ifndef ESKEW_NUMERIC_HPP
#define ESKEW_NUMERIC_HPP

#include <functional>
#include <utility>

namespace eskew {

/// Standard normal density φ(x).
double norm_pdf(double x);

/// Standard normal CDF Φ(x), accurate over the full double range.
double norm_cdf(double x);

/// log Φ(x), finite and accurate down to x = -40 (and beyond): the left tail
/// is evaluated through the same scaled-ratio machinery as zeta1 instead of
/// taking log of an underflowing Φ.
double log_norm_cdf(double x);

/// Φ⁻¹(p) for p in (0, 1).
double norm_quantile(double p);

/// ζ₁(x) = φ(x)/Φ(x).
///
/// Strictly positive, asymptotic to -x as x → -∞. Direct evaluation is used
/// for x ≥ -8; below that the value comes from a Mills-ratio continued
/// fraction so there is no underflow anywhere in [-40, 40] (or, in fact, for
/// any finite x). The two branches agree to better than 1e-12 at the seam.
///
/// \throws std::invalid_argument on non-finite input
double zeta1(double x);

/// ζ₂(x) = ζ₁'(x) = -ζ₁(x)·(x + ζ₁(x)); always in (-1, 0).
///
/// \throws std::invalid_argument on non-finite input
double zeta2(double x);

/// P(Z₁ ≤ h, Z₂ ≤ k) for a standard bivariate normal pair with correlation
/// rho. Gauss–Legendre evaluation of the Drezner–Wesolowsky-type reduction;
/// absolute error below 5e-8 over the whole domain. The degenerate cases
/// rho = ±1 are handled analytically.
///
/// \throws std::invalid_argument if |rho| > 1 or any input is NaN
double bvn_cdf(double h, double k, double rho);

/// Conditional law of the latent selection variable U given an observation:
/// U | Y=y is normal with mean alpha and variance beta², left-truncated at
/// -tau; theta = (alpha + tau)/beta is the standardized truncation threshold.
struct TruncatedConditional {
    double alpha;
    double beta;
    double theta;
    double tau;

    /// \throws std::invalid_argument if beta <= 0 or fields are inconsistent
    TruncatedConditional(double alpha_, double beta_, double tau_);
};

/// First and second moments (m1, m2) of the truncated conditional law:
///   m1 = α + β·ζ₁(θ),  m2 = α² + β² + (α − τ)·β·ζ₁(θ).
/// The implied variance m2 - m1² is strictly positive.
std::pair<double, double> trunc_norm_moments(const TruncatedConditional& cond);

/// Golden-section minimizer of a unimodal function on [lo, hi]; returns the
/// abscissa of the minimum with absolute tolerance tol.
double golden_section_min(const std::function<double(double)>& f, double lo,
                          double hi, double tol);

}  // namespace eskew

#endif  // ESKEW_NUMERIC_HPP
