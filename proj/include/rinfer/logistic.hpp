// L1-regularized logistic regression fit by cyclic coordinate descent with
// soft-thresholding. Used as the well-calibrated labeling model.
#pragma once

#include "rinfer/types.hpp"

#include <vector>

namespace rinfer {

struct L1FitOptions {
    Scalar tol = 1e-7;       // converged when the largest coordinate update is below this
    int max_sweeps = 2000;
    bool standardize = true; // zero mean / unit variance from the training data
};

/// Objective trace and convergence info for one fit.
struct L1FitTrace {
    std::vector<Scalar> objective;  // penalized objective after each sweep
    int sweeps = 0;
    bool converged = false;
};

class L1LogisticModel {
public:
    L1LogisticModel() = default;
    L1LogisticModel(Vector weights, Scalar intercept, Scalar lambda, Vector feature_means,
                    Vector feature_scales);

    /// Predicted PD for each row, strictly inside (0,1).
    Vector predict_proba(const Matrix& X) const;

    /// Weights in the standardized feature space the solver worked in.
    const Vector& weights() const { return weights_; }
    Scalar intercept() const { return intercept_; }
    Scalar lambda() const { return lambda_; }
    const Vector& feature_means() const { return feature_means_; }
    const Vector& feature_scales() const { return feature_scales_; }
    Index n_features() const { return weights_.size(); }

private:
    Vector weights_;
    Scalar intercept_ = 0;
    Scalar lambda_ = 0;
    Vector feature_means_;
    Vector feature_scales_;
};

/// Minimizes mean logistic loss + lambda * ||w||_1 (intercept unpenalized).
/// The objective is non-increasing across sweeps. Throws on single-class
/// input or non-finite features.
L1LogisticModel fit_l1_logistic(const Matrix& X, const std::vector<Label>& y, Scalar lambda,
                                const L1FitOptions& options = {}, L1FitTrace* trace = nullptr);

/// Penalized objective: mean logistic loss + lambda * ||w||_1.
Scalar l1_objective(const Matrix& X, const Vector& targets, const Vector& weights,
                    Scalar intercept, Scalar lambda);

/// Gradient of the unpenalized mean logistic loss with respect to the
/// weights; the extra last entry is the intercept derivative.
Vector logistic_loss_gradient(const Matrix& X, const Vector& targets, const Vector& weights,
                              Scalar intercept);

}  // namespace rinfer
