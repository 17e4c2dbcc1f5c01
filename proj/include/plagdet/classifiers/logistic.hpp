#pragma once

// L2-regularized logistic regression trained by damped Newton iterations.
//
// Objective (per-sample normalized, bias unregularized):
//   J(w, b) = 1/n * sum_i log(1 + exp(-s_i (w.x_i + b))) + |w|^2 / (2 C n)
// with s_i = 2 y_i - 1. This has the same minimizer as the scikit-learn
// formulation C * sum(loss) + |w|^2 / 2.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plagdet/classifiers/feature_matrix.hpp"
#include "plagdet/common.hpp"

namespace plagdet::classifiers {

struct LinearModel {
    Vector weights;
    double bias = 0.0;

    double predict_proba(std::span<const double> x) const { return sigmoid(dot(weights, x) + bias); }

    bool operator==(const LinearModel&) const = default;
};

/// Objective value at params = (w_1..w_d, b).
inline double logistic_loss(std::span<const double> params, const FeatureMatrix& data, double C)
{
    const size_t d = data.dim();
    require(params.size() == d + 1, "logistic_loss: expected d + 1 parameters");
    const double n = static_cast<double>(data.size());
    double loss = 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
        const double z = dot(params.first(d), data.rows[i]) + params[d];
        const double s = data.labels[i] == 1 ? 1.0 : -1.0;
        loss += log1p_exp(-s * z);
    }
    double reg = 0.0;
    for (size_t j = 0; j < d; ++j)
        reg += params[j] * params[j];
    return loss / n + reg / (2.0 * C * n);
}

/// Analytic gradient of logistic_loss; last entry is the bias component.
inline Vector logistic_gradient(std::span<const double> params, const FeatureMatrix& data, double C)
{
    require(C > 0.0, "logistic_gradient: C must be positive");
    const size_t d = data.dim();
    require(params.size() == d + 1, "logistic_gradient: expected d + 1 parameters");
    const double n = static_cast<double>(data.size());
    Vector grad(d + 1, 0.0);
    for (size_t i = 0; i < data.size(); ++i) {
        const double z = dot(params.first(d), data.rows[i]) + params[d];
        const double r = sigmoid(z) - static_cast<double>(data.labels[i]);
        for (size_t j = 0; j < d; ++j)
            grad[j] += r * data.rows[i][j];
        grad[d] += r;
    }
    for (size_t j = 0; j < d; ++j)
        grad[j] = grad[j] / n + params[j] / (C * n);
    grad[d] /= n;
    return grad;
}

struct LogregOptions {
    double C = 1.0;
    double tol = 1e-6;
    size_t max_iter = 10000;
};

struct LogregFit {
    LinearModel model;
    size_t iterations = 0;
    double grad_inf_norm = 0.0;
    bool converged = false;
};

inline LogregFit fit_logreg(const FeatureMatrix& data, const LogregOptions& opt)
{
    require(opt.C > 0.0, "logreg: C must be positive");
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto d = static_cast<Eigen::Index>(data.dim());

    // design matrix with a trailing bias column
    Eigen::MatrixXd x(n, d + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j)
            x(i, j) = data.rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
        x(i, d) = 1.0;
        y(i) = data.labels[static_cast<size_t>(i)];
    }
    const double nn = static_cast<double>(n);
    const double reg = 1.0 / (opt.C * nn);

    auto objective = [&](const Eigen::VectorXd& p) {
        const Eigen::VectorXd z = x * p;
        double loss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            loss += log1p_exp(y(i) > 0.5 ? -z(i) : z(i));
        return loss / nn + 0.5 * reg * p.head(d).squaredNorm();
    };

    Eigen::VectorXd params = Eigen::VectorXd::Zero(d + 1);
    double f = objective(params);
    LogregFit out;
    for (size_t iter = 0; iter < opt.max_iter; ++iter) {
        const Eigen::VectorXd z = x * params;
        Eigen::VectorXd p(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p(i) = sigmoid(z(i));
            w(i) = p(i) * (1.0 - p(i));
        }
        Eigen::VectorXd grad = x.transpose() * (p - y) / nn;
        grad.head(d) += reg * params.head(d);
        out.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
        out.iterations = iter;
        if (out.grad_inf_norm < opt.tol) {
            out.converged = true;
            break;
        }

        Eigen::MatrixXd hess = x.transpose() * w.asDiagonal() * x / nn;
        hess.diagonal().head(d).array() += reg;
        hess(d, d) += 1e-12;
        const Eigen::VectorXd step = hess.ldlt().solve(grad);

        // backtracking on the objective
        double t = 1.0;
        const double slope = grad.dot(step);
        Eigen::VectorXd candidate;
        double fc = f;
        while (t > 1e-12) {
            candidate = params - t * step;
            fc = objective(candidate);
            if (fc <= f - 1e-4 * t * slope)
                break;
            t *= 0.5;
        }
        if (t <= 1e-12) {
            // fall back to a plain gradient step when the Newton direction stalls
            candidate = params - grad;
            fc = objective(candidate);
            if (!(fc < f))
                break;
        }
        params = candidate;
        f = fc;
    }

    out.model.weights.assign(params.data(), params.data() + d);
    out.model.bias = params(d);
    return out;
}

} // namespace plagdet::classifiers
