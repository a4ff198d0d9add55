#include "eskew/esn.hpp"

#include <cmath>
#include <stdexcept>

#include "eskew/linalg.hpp"

namespace eskew {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Below this τ the rejection sampler's acceptance rate Φ(τ) drops under
// ~1.3e-3 (≳740 scalar redraws per accepted X₀) and X₀ is drawn by inverse
// CDF instead.
constexpr double kRejectionTauFloor = -3.0;

// Below this τ even Φ(τ) is not representable in double precision, so the
// inverse map is evaluated by an exponential-proposal tail sampler
// (distribution-identical; pure representability guard).
constexpr double kInverseCdfTauFloor = -37.0;

// One draw of X₀ ~ N(0,1) conditioned on X₀ + tau > 0.
double sample_x0(RngStream& rng, double tau) {
    if (tau >= kRejectionTauFloor) {
        for (;;) {
            const double x0 = rng.normal();
            if (x0 + tau > 0.0) return x0;
        }
    }
    if (tau >= kInverseCdfTauFloor) {
        // P(X₀ > -tau) = Φ(tau); map a uniform into the upper tail.
        const double p = rng.uniform() * std::exp(log_norm_cdf(tau));
        return -norm_quantile(p);
    }
    // Exponential-proposal rejection for the extreme tail X₀ > b, b = -tau.
    const double b = -tau;
    const double lambda = 0.5 * (b + std::sqrt(b * b + 4.0));
    for (;;) {
        const double x = b - std::log(rng.uniform()) / lambda;
        const double diff = x - lambda;
        if (rng.uniform() <= std::exp(-0.5 * diff * diff)) return x;
    }
}

}  // namespace

void EsnParams::finalize() {
    if (Omega_.rows() != xi_.size() || eta_.size() != xi_.size() ||
        delta_.size() != xi_.size() || Sigma_.rows() != xi_.size()) {
        throw std::invalid_argument("EsnParams: dimension mismatch");
    }
    chol_omega_ = chol_lower(Omega_);
    chol_sigma_ = chol_lower(Sigma_);
    log_det_omega_ = 2.0 * chol_omega_.diagonal().array().log().sum();
    omega_inv_delta_ = chol_omega_.transpose().triangularView<Eigen::Upper>().solve(
        chol_omega_.triangularView<Eigen::Lower>().solve(delta_));
    const double beta_sq = 1.0 - delta_.dot(omega_inv_delta_);
    if (!(beta_sq > 0.0)) {
        throw NotPositiveDefiniteError(
            "EsnParams: conditional variance 1 - delta' Omega^{-1} delta is "
            "not positive");
    }
    beta_ = std::sqrt(beta_sq);
}

EsnParams EsnParams::from_centered(Eigen::VectorXd xi, Eigen::MatrixXd Omega,
                                   Eigen::VectorXd eta, double tau) {
    EsnParams p;
    p.xi_ = std::move(xi);
    p.Omega_ = std::move(Omega);
    p.eta_ = std::move(eta);
    p.tau_ = tau;
    const double q = p.eta_.dot(p.Omega_ * p.eta_);
    const double root = std::sqrt(1.0 + q);
    p.delta_ = p.Omega_ * p.eta_ / root;
    p.Sigma_ = p.Omega_ - p.delta_ * p.delta_.transpose();
    p.tau_bar_ = tau * root;
    p.finalize();
    return p;
}

EsnParams EsnParams::from_delta(Eigen::VectorXd xi, Eigen::MatrixXd Sigma,
                                Eigen::VectorXd delta, double tau) {
    EsnParams p;
    p.xi_ = std::move(xi);
    p.Sigma_ = std::move(Sigma);
    p.delta_ = std::move(delta);
    p.tau_ = tau;
    // Solve Σ z = δ once; the rest are dot products.
    const Eigen::MatrixXd chol_sigma = chol_lower(p.Sigma_);
    const Eigen::VectorXd z = chol_sigma.transpose().triangularView<Eigen::Upper>().solve(
        chol_sigma.triangularView<Eigen::Lower>().solve(p.delta_));
    const double q = p.delta_.dot(z);
    const double root = std::sqrt(1.0 + q);
    p.Omega_ = p.Sigma_ + p.delta_ * p.delta_.transpose();
    p.eta_ = z / root;
    p.tau_bar_ = tau * root;
    p.finalize();
    return p;
}

double log_pdf(const EsnParams& p, const Eigen::VectorXd& y) {
    if (y.size() != p.xi().size()) {
        throw std::invalid_argument("log_pdf: dimension mismatch");
    }
    const Eigen::VectorXd centered = y - p.xi();
    const Eigen::VectorXd w =
        p.chol_omega().triangularView<Eigen::Lower>().solve(centered);
    const double q = w.squaredNorm();
    const double log_phi_d =
        -0.5 * (p.dim() * kLog2Pi + p.log_det_omega() + q);
    return log_phi_d + log_norm_cdf(p.eta().dot(centered) + p.tau_bar()) -
           log_norm_cdf(p.tau());
}

double pdf(const EsnParams& p, const Eigen::VectorXd& y) {
    return std::exp(log_pdf(p, y));
}

double cdf1(const EsnParams& p, double y) {
    if (p.dim() != 1) {
        throw std::invalid_argument("cdf1: defined for d == 1 only");
    }
    const double root_omega = std::sqrt(p.Omega()(0, 0));
    const double z = (y - p.xi()(0)) / root_omega;
    const double rho = -p.delta()(0) / root_omega;
    return bvn_cdf(p.tau(), z, rho) / norm_cdf(p.tau());
}

Eigen::MatrixXd sample(const EsnParams& p, RngStream& rng, int n) {
    if (n < 1) {
        throw std::invalid_argument("sample: n must be >= 1");
    }
    const int d = p.dim();
    Eigen::MatrixXd out(n, d);
    Eigen::VectorXd z(d);
    for (int i = 0; i < n; ++i) {
        const double x0 = sample_x0(rng, p.tau());
        for (int j = 0; j < d; ++j) z(j) = rng.normal();
        out.row(i) =
            (p.xi() + p.chol_sigma() * z + p.delta() * x0).transpose();
    }
    return out;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> mean_var(const EsnParams& p) {
    const Eigen::VectorXd mean = p.xi() + zeta1(p.tau()) * p.delta();
    const Eigen::MatrixXd var =
        p.Omega() + zeta2(p.tau()) * p.delta() * p.delta().transpose();
    return {mean, var};
}

std::pair<AffineProjection, EsnParams> affine(const EsnParams& p,
                                              const Eigen::VectorXd& a,
                                              double b) {
    if (a.size() != p.xi().size()) {
        throw std::invalid_argument("affine: dimension mismatch");
    }
    if (a.isZero(0.0)) {
        throw std::invalid_argument("affine: a must be nonzero");
    }
    AffineProjection proj;
    proj.a = a;
    proj.b = b;
    proj.xi_a = a.dot(p.xi()) + b;
    proj.Omega_a = a.dot(p.Omega() * a);
    proj.delta_a = a.dot(p.delta());
    const double ratio = proj.delta_a * proj.delta_a / proj.Omega_a;
    proj.eta_a = (proj.delta_a / proj.Omega_a) / std::sqrt(1.0 - ratio);

    Eigen::VectorXd xi1(1);
    xi1 << proj.xi_a;
    Eigen::MatrixXd sigma1(1, 1);
    sigma1 << proj.Omega_a - proj.delta_a * proj.delta_a;
    Eigen::VectorXd delta1(1);
    delta1 << proj.delta_a;
    return {proj, EsnParams::from_delta(std::move(xi1), std::move(sigma1),
                                        std::move(delta1), p.tau())};
}

TruncatedConditional conditional_u(const EsnParams& p,
                                   const Eigen::VectorXd& y) {
    if (y.size() != p.xi().size()) {
        throw std::invalid_argument("conditional_u: dimension mismatch");
    }
    const double alpha = p.omega_inv_delta().dot(y - p.xi());
    return TruncatedConditional(alpha, p.beta(), p.tau());
}

}  // namespace eskew
