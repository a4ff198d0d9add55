#include "eskew/elliptical.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>

#include "eskew/linalg.hpp"
#include "eskew/numeric.hpp"

namespace eskew {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_generator(const DensityGenerator& gen) {
    if (gen.kind == DensityGenerator::Kind::StudentT && !(gen.nu > 0.0)) {
        throw std::invalid_argument(
            "DensityGenerator: StudentT requires nu > 0");
    }
}

double log_generator_density(const DensityGenerator& gen, int m, double u) {
    if (m < 1) {
        throw std::invalid_argument("generator_density: m must be >= 1");
    }
    if (u < 0.0) {
        throw std::invalid_argument("generator_density: u must be >= 0");
    }
    check_generator(gen);
    if (gen.kind == DensityGenerator::Kind::Normal) {
        return -0.5 * (m * kLog2Pi + u);
    }
    const double nu = gen.nu;
    return std::lgamma(0.5 * (m + nu)) - std::lgamma(0.5 * nu) -
           0.5 * m * std::log(M_PI * nu) -
           0.5 * (m + nu) * std::log1p(u / nu);
}

}  // namespace

DensityGenerator DensityGenerator::student_t(double nu) {
    if (!(nu > 0.0)) {
        throw std::invalid_argument(
            "DensityGenerator: StudentT requires nu > 0");
    }
    return {Kind::StudentT, nu};
}

double generator_density(const DensityGenerator& gen, int m, double u) {
    return std::exp(log_generator_density(gen, m, u));
}

double generator_cdf1(const DensityGenerator& gen, double x) {
    check_generator(gen);
    if (gen.kind == DensityGenerator::Kind::Normal) {
        return norm_cdf(x);
    }
    boost::math::students_t_distribution<double> t(gen.nu);
    return boost::math::cdf(t, x);
}

double conditional_cdf(const DensityGenerator& gen, double x, double Q,
                       int d) {
    if (Q < 0.0) {
        throw std::invalid_argument("conditional_cdf: Q must be >= 0");
    }
    if (d < 1) {
        throw std::invalid_argument("conditional_cdf: d must be >= 1");
    }
    check_generator(gen);
    if (gen.kind == DensityGenerator::Kind::Normal) {
        return norm_cdf(x);
    }
    const double nu = gen.nu;
    const double scale = std::sqrt((nu + Q) / (nu + d));
    boost::math::students_t_distribution<double> t(nu + d);
    return boost::math::cdf(t, x / scale);
}

EseParams::EseParams(Eigen::VectorXd xi_, Eigen::MatrixXd Omega_,
                     Eigen::VectorXd eta_, double tau_, DensityGenerator gen_)
    : xi(std::move(xi_)),
      Omega(std::move(Omega_)),
      eta(std::move(eta_)),
      tau(tau_),
      gen(gen_) {
    check_generator(gen);
    if (Omega.rows() != xi.size() || eta.size() != xi.size()) {
        throw std::invalid_argument("EseParams: dimension mismatch");
    }
    chol_omega_ = chol_lower(Omega);  // throws NotPositiveDefiniteError
    log_det_omega_ = 2.0 * chol_omega_.diagonal().array().log().sum();
    tau_bar_ = tau * std::sqrt(1.0 + eta.dot(Omega * eta));
}

double ese_pdf(const EseParams& p, const Eigen::VectorXd& y) {
    if (y.size() != p.xi.size()) {
        throw std::invalid_argument("ese_pdf: dimension mismatch");
    }
    const Eigen::VectorXd centered = y - p.xi;
    // Q = centered' Omega^{-1} centered via one triangular solve.
    const Eigen::VectorXd w =
        p.chol_omega().triangularView<Eigen::Lower>().solve(centered);
    const double Q = w.squaredNorm();
    const int d = p.dim();
    const double log_core = -0.5 * p.log_det_omega() +
                            log_generator_density(p.gen, d, Q) -
                            std::log(generator_cdf1(p.gen, p.tau));
    const double core = std::exp(log_core);
    if (core == 0.0) {
        // Underflow region (Q may even have overflowed to infinity); the
        // skewing factor is bounded by 1 so the density is zero in double.
        return 0.0;
    }
    const double skew_factor =
        conditional_cdf(p.gen, p.eta.dot(centered) + p.tau_bar(), Q, d);
    return core * skew_factor;
}

std::pair<double, double> ese_posterior(const EseParams& g1,
                                        const EseParams& g2,
                                        std::pair<double, double> priors,
                                        const Eigen::VectorXd& y) {
    const auto [pi1, pi2] = priors;
    if (!(pi1 > 0.0) || !(pi2 > 0.0) || std::abs(pi1 + pi2 - 1.0) > 1e-12) {
        throw std::invalid_argument(
            "ese_posterior: priors must be strictly positive and sum to 1");
    }
    if (g1.dim() != g2.dim()) {
        throw std::invalid_argument("ese_posterior: group dimension mismatch");
    }
    if (g1.gen.kind != g2.gen.kind || g1.gen.nu != g2.gen.nu ||
        g1.tau != g2.tau) {
        throw std::invalid_argument(
            "ese_posterior: groups must share generator and tau");
    }
    const double w1 = pi1 * ese_pdf(g1, y);
    const double w2 = pi2 * ese_pdf(g2, y);
    const double total = w1 + w2;
    return {w1 / total, w2 / total};
}

int ese_classify(const EseParams& g1, const EseParams& g2,
                 std::pair<double, double> priors, const Eigen::VectorXd& y,
                 double cost_2_given_1, double cost_1_given_2) {
    const auto [p1, p2] = ese_posterior(g1, g2, priors, y);
    return (p1 * cost_2_given_1 > p2 * cost_1_given_2) ? 1 : 2;
}

}  // namespace eskew
