#include "eskew/em.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "eskew/linalg.hpp"
#include "eskew/numeric.hpp"

namespace eskew {

namespace {

// Pooled within-group scatter divided by n1+n2; the M-step's Σ̂.
Eigen::MatrixXd pooled_scatter_mle(const TrainingData& data) {
    const Eigen::RowVectorXd mean1 = data.y1.colwise().mean();
    const Eigen::RowVectorXd mean2 = data.y2.colwise().mean();
    const Eigen::MatrixXd c1 = data.y1.rowwise() - mean1;
    const Eigen::MatrixXd c2 = data.y2.rowwise() - mean2;
    return (c1.transpose() * c1 + c2.transpose() * c2) /
           static_cast<double>(data.n1() + data.n2());
}

// Conditional-moment pass over one group's observations.
void group_moments(const Eigen::MatrixXd& y, const Eigen::VectorXd& xi,
                   const Eigen::VectorXd& sigma_inv_delta, double beta,
                   double tau, Eigen::VectorXd* u_hat,
                   Eigen::VectorXd* u2_hat) {
    const int n = static_cast<int>(y.rows());
    u_hat->resize(n);
    u2_hat->resize(n);
    const double beta_sq = beta * beta;
    for (int j = 0; j < n; ++j) {
        const double alpha =
            beta_sq * sigma_inv_delta.dot(y.row(j).transpose() - xi);
        const auto [m1, m2] =
            trunc_norm_moments(TruncatedConditional(alpha, beta, tau));
        (*u_hat)(j) = m1;
        (*u2_hat)(j) = m2;
    }
}

}  // namespace

TrainingData::TrainingData(Eigen::MatrixXd y1_, Eigen::MatrixXd y2_)
    : y1(std::move(y1_)), y2(std::move(y2_)) {
    if (y1.cols() != y2.cols() || y1.cols() < 1) {
        throw std::invalid_argument(
            "TrainingData: groups must share a positive dimension");
    }
    const Eigen::Index d = y1.cols();
    if (y1.rows() < d + 2 || y2.rows() < d + 2) {
        throw std::invalid_argument(
            "TrainingData: each group needs at least d+2 observations");
    }
}

std::pair<EsnParams, EsnParams> theta_to_groups(const Theta& theta) {
    return {EsnParams::from_delta(theta.xi1, theta.Sigma, theta.delta,
                                  theta.tau),
            EsnParams::from_delta(theta.xi2, theta.Sigma, theta.delta,
                                  theta.tau)};
}

double observed_loglik(const Theta& theta, const TrainingData& data) {
    const auto [g1, g2] = theta_to_groups(theta);
    double total = 0.0;
    for (int j = 0; j < data.n1(); ++j) {
        total += log_pdf(g1, data.y1.row(j).transpose());
    }
    for (int j = 0; j < data.n2(); ++j) {
        total += log_pdf(g2, data.y2.row(j).transpose());
    }
    return total;
}

EStepMoments e_step(const Theta& theta, const TrainingData& data) {
    const Eigen::MatrixXd chol_sigma = chol_lower(theta.Sigma);
    const Eigen::VectorXd sigma_inv_delta =
        chol_sigma.transpose().triangularView<Eigen::Upper>().solve(
            chol_sigma.triangularView<Eigen::Lower>().solve(theta.delta));
    const double beta =
        1.0 / std::sqrt(1.0 + theta.delta.dot(sigma_inv_delta));

    EStepMoments moments;
    moments.tau = theta.tau;
    group_moments(data.y1, theta.xi1, sigma_inv_delta, beta, theta.tau,
                  &moments.u_hat_1, &moments.u2_hat_1);
    group_moments(data.y2, theta.xi2, sigma_inv_delta, beta, theta.tau,
                  &moments.u_hat_2, &moments.u2_hat_2);
    return moments;
}

Theta m_step(const TrainingData& data, const EStepMoments& moments) {
    if (moments.u_hat_1.size() != data.n1() ||
        moments.u_hat_2.size() != data.n2()) {
        throw std::invalid_argument("m_step: moments/data shape mismatch");
    }
    const double n1 = data.n1();
    const double n2 = data.n2();

    const Eigen::VectorXd ybar1 = data.y1.colwise().mean().transpose();
    const Eigen::VectorXd ybar2 = data.y2.colwise().mean().transpose();
    const double ubar1 = moments.u_hat_1.mean();
    const double ubar2 = moments.u_hat_2.mean();

    const Eigen::VectorXd numerator =
        data.y1.transpose() * moments.u_hat_1 +
        data.y2.transpose() * moments.u_hat_2 - n1 * ubar1 * ybar1 -
        n2 * ubar2 * ybar2;
    const double denominator = moments.u2_hat_1.sum() +
                               moments.u2_hat_2.sum() -
                               n1 * ubar1 * ubar1 - n2 * ubar2 * ubar2;
    if (!(denominator > 0.0)) {
        throw std::runtime_error(
            "m_step: flat direction (latent second moments carry no "
            "variance)");
    }

    Theta theta;
    theta.tau = moments.tau;
    theta.delta = numerator / denominator;
    theta.xi1 = ybar1 - theta.delta * ubar1;
    theta.xi2 = ybar2 - theta.delta * ubar2;
    theta.Sigma = pooled_scatter_mle(data);
    return theta;
}

Theta init(const TrainingData& data, double tau) {
    Theta theta;
    theta.tau = tau;
    theta.xi1 = data.y1.colwise().mean().transpose();
    theta.xi2 = data.y2.colwise().mean().transpose();
    theta.Sigma = pooled_scatter_mle(data);

    // Third central moments, pooled within groups, per coordinate.
    const int d = data.dim();
    const Eigen::RowVectorXd mean1 = data.y1.colwise().mean();
    const Eigen::RowVectorXd mean2 = data.y2.colwise().mean();
    const Eigen::MatrixXd c1 = data.y1.rowwise() - mean1;
    const Eigen::MatrixXd c2 = data.y2.rowwise() - mean2;
    theta.delta.resize(d);
    for (int k = 0; k < d; ++k) {
        const double third =
            c1.col(k).array().cube().sum() + c2.col(k).array().cube().sum();
        const double std_k = std::sqrt(theta.Sigma(k, k));
        theta.delta(k) = 0.1 * std_k * (third >= 0.0 ? 1.0 : -1.0);
    }
    return theta;
}

FitResult fit(const TrainingData& data, double tau, int max_iter,
              double tol) {
    if (!std::isfinite(tau)) {
        throw std::invalid_argument("fit: tau must be finite");
    }
    if (max_iter < 1) {
        throw std::invalid_argument("fit: max_iter must be >= 1");
    }

    FitResult result;
    result.theta = init(data, tau);
    double loglik = observed_loglik(result.theta, data);
    result.loglik_trace.push_back(loglik);

    for (int iter = 1; iter <= max_iter; ++iter) {
        const EStepMoments moments = e_step(result.theta, data);
        result.theta = m_step(data, moments);
        const double next = observed_loglik(result.theta, data);
        if (!std::isfinite(next)) {
            throw std::runtime_error(
                "fit: log-likelihood became non-finite at iteration " +
                std::to_string(iter));
        }
        result.loglik_trace.push_back(next);
        result.iterations = iter;
        if (std::abs(next - loglik) <= tol * (1.0 + std::abs(loglik))) {
            break;
        }
        loglik = next;
    }
    return result;
}

}  // namespace eskew
