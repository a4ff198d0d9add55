#ifndef ESKEW_LINALG_HPP
#define ESKEW_LINALG_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "eskew/errors.hpp"
#include "eskew/rng.hpp"

namespace eskew {

/// Lower-triangular Cholesky factor L with L·Lᵀ = M.
///
/// M must be symmetric to 1e-12 (relative to its largest entry) and positive
/// definite; the smallest pivot is additionally required to exceed
/// 1e-12·trace(M) so that numerically singular inputs are rejected instead of
/// silently factored.
///
/// \throws std::invalid_argument   if M is not square or not symmetric
/// \throws NotPositiveDefiniteError if the factorization fails or a pivot is
///         below the tolerance
inline Eigen::MatrixXd chol_lower(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("chol_lower: matrix must be square");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("chol_lower: matrix must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefiniteError("chol_lower: matrix is not positive definite");
    }
    Eigen::MatrixXd l = llt.matrixL();
    const double pivot_floor = 1e-12 * m.trace();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        if (!(l(i, i) > pivot_floor)) {
            throw NotPositiveDefiniteError(
                "chol_lower: pivot below 1e-12 * trace; matrix treated as not "
                "positive definite");
        }
    }
    return l;
}

/// n i.i.d. draws from N_d(mean, cov), one per row.
///
/// Deterministic given the stream state: row i consumes exactly d normal
/// variates, in order.
inline Eigen::MatrixXd mvn_sample(const Eigen::VectorXd& mean,
                                  const Eigen::MatrixXd& cov, RngStream& rng,
                                  int n) {
    if (n < 1) {
        throw std::invalid_argument("mvn_sample: n must be >= 1");
    }
    if (cov.rows() != mean.size()) {
        throw std::invalid_argument("mvn_sample: mean/cov dimension mismatch");
    }
    const Eigen::MatrixXd l = chol_lower(cov);
    const Eigen::Index d = mean.size();
    Eigen::MatrixXd out(n, d);
    Eigen::VectorXd z(d);
    for (int i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
        out.row(i) = (mean + l * z).transpose();
    }
    return out;
}

}  // namespace eskew

#endif  // ESKEW_LINALG_HPP
