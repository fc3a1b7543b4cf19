// Reference implementations shared by the unit tests and the acceptance run.
// Each one is written without calling the library routine it checks.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "bevsense/fit.hpp"
#include "bevsense/forest.hpp"
#include "bevsense/frame.hpp"
#include "bevsense/mlp.hpp"
#include "bevsense/rng.hpp"

namespace oracle {

using namespace bevsense;

// Plain central differences, h = 1e-5 |p|.
inline Eigen::MatrixXd central_jacobian(const std::vector<double>& p, const FitProblem& prob) {
    const Eigen::Index m = residuals(p, prob).size();
    Eigen::MatrixXd J(m, static_cast<Eigen::Index>(p.size()));
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double h = 1e-5 * std::abs(p[k]);
        auto hi = p, lo = p;
        hi[k] += h;
        lo[k] -= h;
        J.col(static_cast<Eigen::Index>(k)) = (residuals(hi, prob) - residuals(lo, prob)) / (2 * h);
    }
    return J;
}

/// Worst column-wise relative error: max_k ||J_k - C_k||_inf / ||C_k||_inf.
inline double jacobian_rel_error(const Eigen::MatrixXd& J, const Eigen::MatrixXd& C) {
    double worst = 0;
    for (Eigen::Index k = 0; k < J.cols(); ++k) {
        const double scale = C.col(k).cwiseAbs().maxCoeff();
        if (scale == 0.0) continue;
        worst = std::max(worst, (J.col(k) - C.col(k)).cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}

/// Worst entry-wise relative error over entries above 1e-8. Forward differences lose
/// accuracy where a derivative crosses zero, so this is reported, not asserted.
inline double jacobian_entry_error(const Eigen::MatrixXd& J, const Eigen::MatrixXd& C) {
    double worst = 0;
    for (Eigen::Index i = 0; i < J.rows(); ++i)
        for (Eigen::Index k = 0; k < J.cols(); ++k)
            if (std::abs(C(i, k)) > 1e-8) worst = std::max(worst, std::abs(J(i, k) - C(i, k)) / std::abs(C(i, k)));
    return worst;
}

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
    return m;
}

// Top eigenvector of the centered Gram matrix from Eigen's symmetric solver.
inline Eigen::VectorXd top_right_vector(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd a = m.rowwise() - m.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.transpose() * a);
    return es.eigenvectors().col(a.cols() - 1);
}

inline double sign_free_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return std::min((a - b).cwiseAbs().maxCoeff(), (a + b).cwiseAbs().maxCoeff());
}

struct Labeled {
    Eigen::MatrixXd x;
    std::vector<int> y;
    int k;
};

inline Labeled random_data(Rng& rng, int n, int d, int k, bool integer_values) {
    Labeled out{Eigen::MatrixXd(n, d), std::vector<int>(static_cast<std::size_t>(n)), k};
    for (int i = 0; i < n; ++i) {
        out.y[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(static_cast<std::size_t>(k)));
        for (int j = 0; j < d; ++j)
            out.x(i, j) = integer_values ? static_cast<double>(rng.below(5))
                                         : rng.normal() + 0.8 * out.y[static_cast<std::size_t>(i)] * (j == 0);
    }
    return out;
}

// Exhaustive stump search, counting classes directly on each side.
inline SplitChoice brute_force_stump(const Labeled& data) {
    SplitChoice best;
    best.impurity = std::numeric_limits<double>::infinity();
    const auto n = data.x.rows();
    for (Eigen::Index f = 0; f < data.x.cols(); ++f) {
        std::vector<double> vals(data.x.col(f).data(), data.x.col(f).data() + n);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            const double thr = (vals[i] + vals[i + 1]) / 2;
            std::vector<double> l(static_cast<std::size_t>(data.k)), r(static_cast<std::size_t>(data.k));
            double nl = 0, nr = 0;
            for (Eigen::Index s = 0; s < n; ++s) {
                if (data.x(s, f) <= thr) {
                    ++l[static_cast<std::size_t>(data.y[static_cast<std::size_t>(s)])];
                    ++nl;
                } else {
                    ++r[static_cast<std::size_t>(data.y[static_cast<std::size_t>(s)])];
                    ++nr;
                }
            }
            double gl = 1, gr = 1;
            for (int c = 0; c < data.k; ++c) {
                gl -= (l[static_cast<std::size_t>(c)] / nl) * (l[static_cast<std::size_t>(c)] / nl);
                gr -= (r[static_cast<std::size_t>(c)] / nr) * (r[static_cast<std::size_t>(c)] / nr);
            }
            const double imp = (nl * gl + nr * gr) / static_cast<double>(n);
            if (imp < best.impurity - 1e-12) best = {static_cast<int>(f), thr, imp};
        }
    }
    return best;
}

inline Eigen::MatrixXd random_batch(Rng& rng, Eigen::Index n, Eigen::Index d) { return random_matrix(rng, n, d); }

/// Central-difference derivative of the loss with respect to the parameter `param` selects.
template <typename Get>
double loss_derivative(MlpNetwork& net, const Eigen::MatrixXd& x, const std::vector<int>& y, Get&& param) {
    const double h = 1e-5;
    double& p = param(net);
    const double saved = p;
    p = saved + h;
    const double up = mlp_loss(net, x, y);
    p = saved - h;
    const double down = mlp_loss(net, x, y);
    p = saved;
    return (up - down) / (2 * h);
}

/// Small network with biases pushed off zero so no ReLU sits on its kink.
inline MlpNetwork gradient_check_network(Rng& rng) {
    MlpNetwork net = init_mlp({3, 4, 2}, 7);
    for (auto& l : net.layers)
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = 0.1 * rng.normal();
    return net;
}

/// Worst relative gap between analytic and finite-difference gradients over every parameter.
/// Gradients below 1e-6 count as matching when the numeric value is also below 1e-6.
inline double mlp_gradient_error(MlpNetwork& net, const Eigen::MatrixXd& x, const std::vector<int>& y) {
    const auto g = mlp_loss_gradients(net, x, y);
    double worst = 0;
    auto check = [&](double analytic, double numeric) {
        if (std::abs(analytic) > 1e-6) worst = std::max(worst, std::abs(analytic - numeric) / std::abs(analytic));
        else if (std::abs(numeric) > 1e-6) worst = std::numeric_limits<double>::infinity();
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l)
        for (Eigen::Index i = 0; i < net.layers[l].weights.rows(); ++i) {
            for (Eigen::Index j = 0; j < net.layers[l].weights.cols(); ++j)
                check(g.layers[l].weights(i, j),
                      loss_derivative(net, x, y, [&](MlpNetwork& n) -> double& { return n.layers[l].weights(i, j); }));
            check(g.layers[l].bias[i],
                  loss_derivative(net, x, y, [&](MlpNetwork& n) -> double& { return n.layers[l].bias[i]; }));
        }
    return worst;
}

// Byte-wise table CRC, built independently of the bit loop in the library.
inline std::uint16_t table_crc(std::span<const std::uint8_t> data) {
    static const auto table = [] {
        std::array<std::uint16_t, 256> t{};
        for (unsigned i = 0; i < 256; ++i) {
            std::uint16_t c = static_cast<std::uint16_t>(i << 8);
            for (int k = 0; k < 8; ++k) c = static_cast<std::uint16_t>(c & 0x8000 ? (c << 1) ^ 0x1021 : c << 1);
            t[i] = c;
        }
        return t;
    }();
    std::uint16_t crc = 0xFFFF;
    for (auto b : data) crc = static_cast<std::uint16_t>((crc << 8) ^ table[((crc >> 8) ^ b) & 0xFF]);
    return crc;
}

inline PointFrame random_frame(Rng& rng) {
    auto f32 = [&](double lo, double hi) { return static_cast<float>(lo + (hi - lo) * rng.uniform()); };
    return {static_cast<std::uint16_t>(rng.below(65536)), static_cast<std::uint8_t>(rng.below(256)),
            f32(1e-3, 1e7), f32(-1e6, 1e6), f32(-1e6, 1e6)};
}

}  // namespace oracle
