#pragma once

// One-sided (Hestenes) Jacobi singular value decomposition.
//
// Columns of a working copy of A are rotated pairwise until mutually
// orthogonal; the accumulated rotations form V, the final column norms are the
// singular values, and the normalized columns are U. Accurate to working
// precision for small dense matrices, which is all the feature pipeline needs.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "bevsense/error.hpp"

namespace bevsense {

struct SvdResult {
    Eigen::VectorXd singular_values;  // descending
    Eigen::MatrixXd u;                // m x n, columns for zero singular values are zero
    Eigen::MatrixXd v;                // n x n orthogonal
    int sweeps = 0;
};

inline SvdResult jacobi_svd(const Eigen::MatrixXd& a, int max_sweeps = 100) {
    const Eigen::Index n = a.cols();
    Eigen::MatrixXd w = a;
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    constexpr double tol = 1e-15;
    // columns this small are rounding residue of a rank-deficient input
    const double negligible = 1e-28 * a.squaredNorm();

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = w.col(p).squaredNorm();
                const double beta = w.col(q).squaredNorm();
                const double gamma = w.col(p).dot(w.col(q));
                if (alpha <= negligible || beta <= negligible) continue;
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Eigen::Index i = 0; i < w.rows(); ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }
    if (sweep == max_sweeps) throw NumericalError("Jacobi SVD did not converge");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Eigen::VectorXd norms(n);
    for (Eigen::Index j = 0; j < n; ++j) norms[j] = w.col(j).norm();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return norms[x] > norms[y]; });

    SvdResult out;
    out.singular_values.resize(n);
    out.u = Eigen::MatrixXd::Zero(w.rows(), n);
    out.v.resize(n, n);
    out.sweeps = sweep + 1;
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index j = order[static_cast<std::size_t>(k)];
        out.singular_values[k] = norms[j];
        out.v.col(k) = v.col(j);
        if (norms[j] > 0.0) out.u.col(k) = w.col(j) / norms[j];
    }
    return out;
}

/// Flip `x` so its largest-magnitude entry (first one on ties) is positive.
inline void fix_sign(Eigen::VectorXd& x) {
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < x.size(); ++i)
        if (std::abs(x[i]) > std::abs(x[arg])) arg = i;
    if (x.size() > 0 && x[arg] < 0.0) x = -x;
}

inline Eigen::MatrixXd center_columns(const Eigen::MatrixXd& m) {
    return m.rowwise() - m.colwise().mean();
}

/// Unit right singular vector for the largest singular value of the
/// (optionally column-centered) matrix, sign-normalized by fix_sign.
inline Eigen::VectorXd first_right_singular_vector(const Eigen::MatrixXd& m, bool center = true) {
    if (m.rows() == 0 || m.cols() == 0) throw InvalidArgument("matrix must be non-empty");
    if (!m.allFinite()) throw InvalidArgument("matrix contains non-finite entries");
    const Eigen::MatrixXd a = center ? center_columns(m) : m;
    const double scale = a.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw NumericalError("matrix is zero after centering: no principal direction");
    // Scaling keeps the rotation thresholds meaningful for tiny or huge inputs.
    const SvdResult svd = jacobi_svd(a / scale);
    Eigen::VectorXd v1 = svd.v.col(0);
    v1.normalize();
    fix_sign(v1);
    return v1;
}

}  // namespace bevsense
