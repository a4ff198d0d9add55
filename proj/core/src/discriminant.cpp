#include "eskew/discriminant.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "eskew/numeric.hpp"

namespace eskew {

namespace {

double quad_form_inv(const EsnParams& p, const Eigen::VectorXd& centered) {
    const Eigen::VectorXd w =
        p.chol_omega().triangularView<Eigen::Lower>().solve(centered);
    return w.squaredNorm();
}

void require_homoscedastic(const GroupPair& gp, const char* who) {
    if (!gp.homoscedastic()) {
        throw std::invalid_argument(std::string(who) +
                                    ": groups must share Omega and eta");
    }
}

LinearRule make_rule(const GroupPair& gp, Eigen::VectorXd a, double b) {
    auto [proj1, law1] = affine(gp.g1, a, b);
    auto [proj2, law2] = affine(gp.g2, a, b);
    (void)proj1;
    (void)proj2;
    return LinearRule{std::move(a), b, std::nullopt, std::move(law1),
                      std::move(law2)};
}

}  // namespace

GroupPair::GroupPair(EsnParams g1_, EsnParams g2_,
                     std::pair<double, double> priors_)
    : g1(std::move(g1_)), g2(std::move(g2_)), priors(priors_) {
    if (g1.dim() != g2.dim()) {
        throw std::invalid_argument("GroupPair: dimension mismatch");
    }
    if (g1.tau() != g2.tau()) {
        throw std::invalid_argument("GroupPair: tau must be shared");
    }
    const auto [pi1, pi2] = priors;
    if (!(pi1 > 0.0) || !(pi2 > 0.0) || std::abs(pi1 + pi2 - 1.0) > 1e-12) {
        throw std::invalid_argument(
            "GroupPair: priors must be strictly positive and sum to 1");
    }
}

bool GroupPair::homoscedastic() const {
    const double scale =
        std::max(1.0, g1.Omega().cwiseAbs().maxCoeff());
    const double omega_gap =
        (g1.Omega() - g2.Omega()).cwiseAbs().maxCoeff();
    const double eta_scale = std::max(1.0, g1.eta().cwiseAbs().maxCoeff());
    const double eta_gap = (g1.eta() - g2.eta()).cwiseAbs().maxCoeff();
    return omega_gap <= 1e-12 * scale && eta_gap <= 1e-12 * eta_scale;
}

double psi_n(const GroupPair& gp, const Eigen::VectorXd& y) {
    if (y.size() != gp.g1.xi().size()) {
        throw std::invalid_argument("psi_n: dimension mismatch");
    }
    const double q1 = quad_form_inv(gp.g1, y - gp.g1.xi());
    const double q2 = quad_form_inv(gp.g2, y - gp.g2.xi());
    return 0.5 * (q2 - q1) +
           0.5 * (gp.g2.log_det_omega() - gp.g1.log_det_omega());
}

double psi_l(const GroupPair& gp, const Eigen::VectorXd& y) {
    const double scale = std::max(1.0, gp.g1.Omega().cwiseAbs().maxCoeff());
    if ((gp.g1.Omega() - gp.g2.Omega()).cwiseAbs().maxCoeff() >
        1e-12 * scale) {
        throw std::invalid_argument("psi_l: groups must share Omega");
    }
    if (y.size() != gp.g1.xi().size()) {
        throw std::invalid_argument("psi_l: dimension mismatch");
    }
    const Eigen::VectorXd diff = gp.g1.xi() - gp.g2.xi();
    const Eigen::VectorXd ybar = y - 0.5 * (gp.g1.xi() + gp.g2.xi());
    const Eigen::MatrixXd& l = gp.g1.chol_omega();
    const Eigen::VectorXd w1 = l.triangularView<Eigen::Lower>().solve(diff);
    const Eigen::VectorXd w2 = l.triangularView<Eigen::Lower>().solve(ybar);
    return w1.dot(w2);
}

double psi_esn(const GroupPair& gp, const Eigen::VectorXd& y) {
    if (y.size() != gp.g1.xi().size()) {
        throw std::invalid_argument("psi_esn: dimension mismatch");
    }
    return psi_n(gp, y) +
           log_norm_cdf(gp.g1.eta().dot(y - gp.g1.xi()) + gp.g1.tau_bar()) -
           log_norm_cdf(gp.g2.eta().dot(y - gp.g2.xi()) + gp.g2.tau_bar());
}

LinearRule psi_esn_linear(const GroupPair& gp) {
    require_homoscedastic(gp, "psi_esn_linear");
    const Eigen::VectorXd diff = gp.g1.xi() - gp.g2.xi();
    const Eigen::VectorXd xbar = 0.5 * (gp.g1.xi() + gp.g2.xi());
    const Eigen::VectorXd& eta = gp.g1.eta();
    const double tb = gp.g1.tau_bar();

    const Eigen::MatrixXd& l = gp.g1.chol_omega();
    const Eigen::VectorXd omega_inv_diff =
        l.transpose().triangularView<Eigen::Upper>().solve(
            l.triangularView<Eigen::Lower>().solve(diff));
    const Eigen::VectorXd a =
        omega_inv_diff - zeta2(tb) * eta * eta.dot(diff);
    const double b = -a.dot(xbar) - zeta1(tb) * eta.dot(diff);
    return make_rule(gp, a, b);
}

LinearRule psi_cn_linear(const GroupPair& gp) {
    require_homoscedastic(gp, "psi_cn_linear");
    const Eigen::VectorXd diff = gp.g1.xi() - gp.g2.xi();
    const Eigen::VectorXd xbar = 0.5 * (gp.g1.xi() + gp.g2.xi());
    const Eigen::VectorXd& eta = gp.g1.eta();
    const double tb = gp.g1.tau_bar();
    const double z1 = zeta1(tb);
    const double z2 = zeta2(tb);
    const auto [pi1, pi2] = gp.priors;

    const Eigen::MatrixXd& ls = gp.g1.chol_sigma();
    const Eigen::VectorXd sigma_inv_diff =
        ls.transpose().triangularView<Eigen::Upper>().solve(
            ls.triangularView<Eigen::Lower>().solve(diff));
    const double eta_diff = eta.dot(diff);
    const Eigen::VectorXd a = sigma_inv_diff + (1.0 + z2) * eta * eta_diff;
    const double b = -a.dot(xbar) + (z1 + tb * z2) * eta_diff +
                     0.5 * (1.0 + z2) * eta_diff * eta_diff * (pi1 - pi2);
    return make_rule(gp, a, b);
}

double psi_cn_exact(const GroupPair& gp, const Eigen::VectorXd& y) {
    if (y.size() != gp.g1.xi().size()) {
        throw std::invalid_argument("psi_cn_exact: dimension mismatch");
    }
    const auto [pi1, pi2] = gp.priors;

    // Per-group conditional laws of the latent U and Σ-based quadratics.
    const auto cond1 = conditional_u(gp.g1, y);
    const auto cond2 = conditional_u(gp.g2, y);
    const auto [m1_1, m2_1] = trunc_norm_moments(cond1);
    const auto [m1_2, m2_2] = trunc_norm_moments(cond2);
    const double mix_m1 = pi1 * m1_1 + pi2 * m1_2;
    const double mix_m2 = pi1 * m2_1 + pi2 * m2_2;

    const Eigen::VectorXd c1 = y - gp.g1.xi();
    const Eigen::VectorXd c2 = y - gp.g2.xi();
    const Eigen::MatrixXd& l1 = gp.g1.chol_sigma();
    const Eigen::MatrixXd& l2 = gp.g2.chol_sigma();
    const Eigen::VectorXd w1 = l1.triangularView<Eigen::Lower>().solve(c1);
    const Eigen::VectorXd w2 = l2.triangularView<Eigen::Lower>().solve(c2);
    const double log_det_s1 =
        2.0 * l1.diagonal().array().log().sum();
    const double log_det_s2 =
        2.0 * l2.diagonal().array().log().sum();
    const double psi0 = 0.5 * (w2.squaredNorm() - w1.squaredNorm()) +
                        0.5 * (log_det_s2 - log_det_s1);

    // δᵢ⊤Σᵢ^{-1}(y-ξᵢ) = αᵢ/βᵢ² and δᵢ⊤Σᵢ^{-1}δᵢ = (1-βᵢ²)/βᵢ².
    const double b1_sq = cond1.beta * cond1.beta;
    const double b2_sq = cond2.beta * cond2.beta;
    const double lin1 = cond1.alpha / b1_sq;
    const double lin2 = cond2.alpha / b2_sq;
    const double quad1 = (1.0 - b1_sq) / b1_sq;
    const double quad2 = (1.0 - b2_sq) / b2_sq;

    return psi0 - (lin2 - lin1) * mix_m1 + 0.5 * (quad2 - quad1) * mix_m2;
}

double d12(const GroupPair& gp) {
    require_homoscedastic(gp, "d12");
    const Eigen::VectorXd diff = gp.g1.xi() - gp.g2.xi();
    const Eigen::MatrixXd& l = gp.g1.chol_omega();
    const Eigen::VectorXd w = l.triangularView<Eigen::Lower>().solve(diff);
    const double delta_sq = w.squaredNorm();
    const double eta_diff = gp.g1.eta().dot(diff);
    return delta_sq - zeta2(gp.g1.tau_bar()) * eta_diff * eta_diff;
}

int classify_linear(const LinearRule& rule, const Eigen::VectorXd& y) {
    if (!rule.gamma.has_value()) {
        throw std::logic_error("classify_linear: gamma has not been set");
    }
    if (y.size() != rule.a.size()) {
        throw std::invalid_argument("classify_linear: dimension mismatch");
    }
    return (rule.a.dot(y) + rule.b > *rule.gamma) ? 1 : 2;
}

int classify_exact(const GroupPair& gp, const Eigen::VectorXd& y,
                   RuleKind kind) {
    const double threshold = std::log(gp.priors.second / gp.priors.first);
    double score = 0.0;
    switch (kind) {
        case RuleKind::esn_exact:
            score = psi_esn(gp, y);
            break;
        case RuleKind::qdf:
            score = psi_n(gp, y);
            break;
        case RuleKind::ldf:
            score = psi_l(gp, y);
            break;
        default:
            throw std::invalid_argument(
                "classify_exact: kind must be esn_exact, qdf, or ldf");
    }
    return (score > threshold) ? 1 : 2;
}

}  // namespace eskew
