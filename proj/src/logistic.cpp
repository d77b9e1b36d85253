#include "rinfer/logistic.hpp"

#include <cmath>
#include <stdexcept>

namespace rinfer {

namespace {

Scalar log1p_exp(Scalar z) {
    // log(1 + e^z) without overflow
    if (z > 35.0) return z;
    if (z < -35.0) return std::exp(z);
    return std::log1p(std::exp(z));
}

Scalar soft_threshold(Scalar u, Scalar t) {
    if (u > t) return u - t;
    if (u < -t) return u + t;
    return 0.0;
}

}  // namespace

L1LogisticModel::L1LogisticModel(Vector weights, Scalar intercept, Scalar lambda,
                                 Vector feature_means, Vector feature_scales)
    : weights_(std::move(weights)),
      intercept_(intercept),
      lambda_(lambda),
      feature_means_(std::move(feature_means)),
      feature_scales_(std::move(feature_scales)) {}

Vector L1LogisticModel::predict_proba(const Matrix& X) const {
    if (X.cols() != weights_.size())
        throw std::invalid_argument("l1 logistic: feature count mismatch");
    Vector z = ((X.rowwise() - feature_means_.transpose()).array().rowwise() /
                feature_scales_.transpose().array())
                   .matrix() *
                   weights_ +
               Vector::Constant(X.rows(), intercept_);
    for (Index i = 0; i < z.size(); ++i) z[i] = sigmoid(z[i]);
    return z;
}

Scalar l1_objective(const Matrix& X, const Vector& targets, const Vector& weights,
                    Scalar intercept, Scalar lambda) {
    const Vector z = X * weights + Vector::Constant(X.rows(), intercept);
    Scalar loss = 0;
    for (Index i = 0; i < z.size(); ++i) loss += log1p_exp(z[i]) - targets[i] * z[i];
    return loss / static_cast<Scalar>(X.rows()) + lambda * weights.template lpNorm<1>();
}

Vector logistic_loss_gradient(const Matrix& X, const Vector& targets, const Vector& weights,
                              Scalar intercept) {
    const Vector z = X * weights + Vector::Constant(X.rows(), intercept);
    Vector r(z.size());
    for (Index i = 0; i < z.size(); ++i) r[i] = sigmoid(z[i]) - targets[i];
    const Scalar n = static_cast<Scalar>(X.rows());
    Vector grad(weights.size() + 1);
    grad.head(weights.size()) = X.transpose() * r / n;
    grad[weights.size()] = r.sum() / n;
    return grad;
}

L1LogisticModel fit_l1_logistic(const Matrix& X, const std::vector<Label>& y, Scalar lambda,
                                const L1FitOptions& options, L1FitTrace* trace) {
    const Index n = X.rows();
    const Index d = X.cols();
    if (n < 2) throw std::invalid_argument("l1 logistic: needs at least 2 rows");
    if (static_cast<Index>(y.size()) != n)
        throw std::invalid_argument("l1 logistic: label count mismatch");
    if (!X.allFinite()) throw std::invalid_argument("l1 logistic: non-finite features");
    if (lambda < 0) throw std::invalid_argument("l1 logistic: lambda must be >= 0");

    const Vector targets = to_targets(y);
    const Scalar bad = targets.sum();
    if (bad == 0.0 || bad == static_cast<Scalar>(n))
        throw std::invalid_argument("l1 logistic: single-class input");

    Vector means = Vector::Zero(d);
    Vector scales = Vector::Ones(d);
    Matrix Xs;
    if (options.standardize) {
        means = X.colwise().mean();
        Xs = X.rowwise() - means.transpose();
        for (Index j = 0; j < d; ++j) {
            const Scalar sd = std::sqrt(Xs.col(j).squaredNorm() / static_cast<Scalar>(n));
            scales[j] = sd > 0 ? sd : 1.0;
            Xs.col(j) /= scales[j];
        }
    } else {
        Xs = X;
    }

    // Per-coordinate curvature majorizer: logistic curvature is at most 1/4,
    // so L_j = 0.25 * mean(x_j^2) upper-bounds the loss curvature along j
    // and each proximal step cannot increase the objective.
    Vector lipschitz(d);
    for (Index j = 0; j < d; ++j)
        lipschitz[j] = 0.25 * Xs.col(j).squaredNorm() / static_cast<Scalar>(n);
    constexpr Scalar intercept_lipschitz = 0.25;

    Vector w = Vector::Zero(d);
    const Scalar base_rate = bad / static_cast<Scalar>(n);
    Scalar b = std::log(base_rate / (1.0 - base_rate));
    Vector z = Vector::Constant(n, b);
    Vector p(n);
    const Scalar inv_n = 1.0 / static_cast<Scalar>(n);

    if (trace) {
        trace->objective.clear();
        trace->converged = false;
        trace->sweeps = 0;
    }

    bool converged = false;
    int sweep = 0;
    for (; sweep < options.max_sweeps && !converged; ++sweep) {
        Scalar max_update = 0;

        for (Index i = 0; i < n; ++i) p[i] = sigmoid(z[i]);
        const Scalar gb = (p - targets).sum() * inv_n;
        const Scalar db = -gb / intercept_lipschitz;
        b += db;
        z.array() += db;
        max_update = std::abs(db);

        for (Index j = 0; j < d; ++j) {
            if (lipschitz[j] <= 0) continue;  // constant column
            for (Index i = 0; i < n; ++i) p[i] = sigmoid(z[i]);
            const Scalar gj = Xs.col(j).dot(p - targets) * inv_n;
            const Scalar u = w[j] - gj / lipschitz[j];
            const Scalar wj_new = soft_threshold(u, lambda / lipschitz[j]);
            const Scalar delta = wj_new - w[j];
            if (delta != 0.0) {
                w[j] = wj_new;
                z += delta * Xs.col(j);
                max_update = std::max(max_update, std::abs(delta));
            }
        }

        if (trace) trace->objective.push_back(l1_objective(Xs, targets, w, b, lambda));
        converged = max_update < options.tol;
    }

    if (trace) {
        trace->sweeps = sweep;
        trace->converged = converged;
    }
    return L1LogisticModel(std::move(w), b, lambda, std::move(means), std::move(scales));
}

}  // namespace rinfer
