#pragma once

// Complex nonlinear least squares for circuit parameters (Levenberg-Marquardt).
// Free parameters are optimized as log(p) and reported in linear units.

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bevsense/circuit.hpp"
#include "bevsense/error.hpp"
#include "bevsense/spectrum.hpp"

namespace bevsense {

enum class Weighting { unit, proportional };

struct FitProblem {
    CircuitModel circuit;
    std::vector<std::size_t> free;  // indices into circuit.parameters(), in fit order
    Spectrum target;
    Weighting weighting = Weighting::proportional;
};

/// Every magnitude parameter (R, C, Q); CPE exponents stay fixed.
inline std::vector<std::size_t> default_free_parameters(const CircuitModel& c) {
    std::vector<std::size_t> out;
    const auto info = c.parameter_info();
    for (std::size_t i = 0; i < info.size(); ++i)
        if (info[i].role != ParameterRole::cpe_alpha) out.push_back(i);
    return out;
}

inline FitProblem make_fit_problem(CircuitModel circuit, Spectrum target, Weighting w = Weighting::proportional) {
    auto free = default_free_parameters(circuit);
    return {std::move(circuit), std::move(free), std::move(target), w};
}

struct FitOptions {
    int max_iter = 200;
    double lambda0 = 1e-3;
    double tol_step = 1e-10;
    double tol_grad = 1e-10;
};

struct FitResult {
    std::vector<double> params;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
    std::optional<std::vector<double>> covariance_diag;
    std::vector<double> cost_history;  // initial cost, then cost after each accepted step
};

namespace detail {

inline void check_free(const FitProblem& prob) {
    if (prob.free.empty()) throw InvalidArgument("fit problem has no free parameters");
    const std::size_t n = prob.circuit.parameter_count();
    for (auto k : prob.free)
        if (k >= n) throw InvalidArgument("free parameter index " + std::to_string(k) + " out of range");
}

inline CircuitModel circuit_with_free(const FitProblem& prob, std::span<const double> p) {
    if (p.size() != prob.free.size())
        throw InvalidArgument("parameter vector has " + std::to_string(p.size()) + " entries, problem expects " +
                              std::to_string(prob.free.size()));
    auto all = prob.circuit.parameters();
    for (std::size_t k = 0; k < p.size(); ++k) all[prob.free[k]] = p[k];
    return prob.circuit.with_parameters(all);
}

inline bool feasible(const FitProblem& prob, std::span<const double> p) {
    const auto info = prob.circuit.parameter_info();
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (!std::isfinite(p[k]) || !(p[k] > 0.0)) return false;
        if (info[prob.free[k]].role == ParameterRole::cpe_alpha && p[k] > 1.0) return false;
    }
    return true;
}

}  // namespace detail

/// Weighted (model - target): all real parts first, then all imaginary parts.
inline Eigen::VectorXd residuals(std::span<const double> p, const FitProblem& prob) {
    detail::check_free(prob);
    for (double v : p)
        if (!(v > 0.0)) throw InvalidArgument("fit parameters must be positive");
    const CircuitModel c = detail::circuit_with_free(prob, p);
    const auto& grid = prob.target.grid();
    const auto& tgt = prob.target.values();
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd r(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const ComplexImpedance z = circuit_impedance(c, 2.0 * std::numbers::pi * grid[idx]);
        double w = 1.0;
        if (prob.weighting == Weighting::proportional) {
            const double mag = std::hypot(tgt[idx].real, tgt[idx].imag);
            if (!(mag > 0.0)) throw NumericalError("proportional weighting needs non-zero target impedance");
            w = 1.0 / mag;
        }
        r[i] = w * (z.real - tgt[idx].real);
        r[n + i] = w * (z.imag - tgt[idx].imag);
    }
    return r;
}

/// Forward differences with step max(1e-6 |p_k|, 1e-12).
inline Eigen::MatrixXd jacobian(std::span<const double> p, const FitProblem& prob) {
    const Eigen::VectorXd r0 = residuals(p, prob);
    Eigen::MatrixXd J(r0.size(), static_cast<Eigen::Index>(p.size()));
    std::vector<double> q(p.begin(), p.end());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double h = std::max(1e-6 * std::abs(p[k]), 1e-12);
        q[k] = p[k] + h;
        J.col(static_cast<Eigen::Index>(k)) = (residuals(q, prob) - r0) / h;
        q[k] = p[k];
    }
    return J;
}

inline FitResult fit_circuit(const FitProblem& prob, std::span<const double> p0, const FitOptions& opts = {}) {
    detail::check_free(prob);
    if (p0.size() != prob.free.size()) throw InvalidArgument("initial guess has wrong arity");
    if (!detail::feasible(prob, p0)) throw InvalidArgument("initial guess must be positive (and alpha <= 1)");

    const auto n = static_cast<Eigen::Index>(p0.size());
    std::vector<double> p(p0.begin(), p0.end());
    Eigen::VectorXd x(n);
    for (Eigen::Index k = 0; k < n; ++k) x[k] = std::log(p[static_cast<std::size_t>(k)]);

    Eigen::VectorXd r = residuals(p, prob);
    double cost = r.squaredNorm();
    double lambda = opts.lambda0;

    FitResult res;
    res.cost_history.push_back(cost);

    auto to_linear = [](const Eigen::VectorXd& v) {
        std::vector<double> out(static_cast<std::size_t>(v.size()));
        for (Eigen::Index k = 0; k < v.size(); ++k) out[static_cast<std::size_t>(k)] = std::exp(v[k]);
        return out;
    };

    while (res.iterations < opts.max_iter && !res.converged) {
        if (cost == 0.0) {
            res.converged = true;
            break;
        }
        // d r / d log p = (d r / d p) * p
        Eigen::MatrixXd J = jacobian(p, prob);
        for (Eigen::Index k = 0; k < n; ++k) J.col(k) *= p[static_cast<std::size_t>(k)];
        const Eigen::VectorXd g = J.transpose() * r;
        if (g.lpNorm<Eigen::Infinity>() < opts.tol_grad) {
            res.converged = true;
            break;
        }
        const Eigen::MatrixXd A = J.transpose() * J;

        bool accepted = false;
        bool any_solved = false;
        Eigen::VectorXd step;
        while (!accepted) {
            if (lambda > 1e10) break;
            Eigen::MatrixXd M = A;
            M.diagonal() += lambda * A.diagonal();
            Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
            step = ldlt.solve(-g);
            if (ldlt.info() != Eigen::Success || !step.allFinite() || !ldlt.isPositive()) {
                lambda *= 10.0;
                continue;
            }
            any_solved = true;
            std::vector<double> p_new = to_linear(x + step);
            for (int halvings = 0; halvings < 60 && !detail::feasible(prob, p_new); ++halvings) {
                step *= 0.5;
                p_new = to_linear(x + step);
            }
            if (!detail::feasible(prob, p_new)) {
                lambda *= 10.0;
                continue;
            }
            const Eigen::VectorXd r_new = residuals(p_new, prob);
            const double cost_new = r_new.squaredNorm();
            if (std::isfinite(cost_new) && cost_new < cost) {
                x += step;
                p = std::move(p_new);
                r = r_new;
                cost = cost_new;
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) {
            if (!any_solved) throw NumericalError("normal equations singular at damping ceiling");
            // No descent direction left at maximal damping: stationary to working precision.
            res.converged = step.size() > 0 && step.norm() < opts.tol_step * (1.0 + x.norm());
            break;
        }
        ++res.iterations;
        res.cost_history.push_back(cost);
        if (step.norm() < opts.tol_step * (1.0 + x.norm())) res.converged = true;
    }

    res.params = p;
    res.cost = cost;

    const Eigen::MatrixXd Jp = jacobian(p, prob);
    const Eigen::Index m = Jp.rows();
    if (m > n) {
        // column scaling keeps the rank test meaningful when parameters span many decades
        Eigen::VectorXd scale = Jp.colwise().norm().transpose();
        for (Eigen::Index k = 0; k < n; ++k) scale[k] = scale[k] > 0.0 ? 1.0 / scale[k] : 1.0;
        const Eigen::MatrixXd Js = Jp * scale.asDiagonal();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(Js.transpose() * Js);
        if (lu.isInvertible()) {
            const double s2 = cost / static_cast<double>(m - n);
            const Eigen::MatrixXd cov = s2 * scale.asDiagonal() * lu.inverse() * scale.asDiagonal();
            std::vector<double> diag(static_cast<std::size_t>(n));
            for (Eigen::Index k = 0; k < n; ++k) diag[static_cast<std::size_t>(k)] = cov(k, k);
            res.covariance_diag = std::move(diag);
        }
    }
    return res;
}

}  // namespace bevsense
