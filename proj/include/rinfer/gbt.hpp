// Gradient-boosted regression trees on the logistic loss, exact greedy
// split search with second-order (Newton) leaf weights.
#pragma once

#include "rinfer/types.hpp"

#include <cstdint>
#include <vector>

namespace rinfer {

struct GbtParams {
    int max_trees = 500;
    int early_stopping_rounds = 25;  // <= 0 disables early stopping
    Scalar learning_rate = 0.1;
    int max_depth = 3;
    Scalar min_child_weight = 1.0;   // minimum hessian sum per child
    Scalar subsample = 1.0;          // row fraction per boosting round
    Scalar reg_lambda = 1.0;         // L2 on leaf weights

    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    Scalar threshold = 0;
    int left = -1;
    int right = -1;
    Scalar value = 0;  // leaf contribution, learning rate already applied
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    template <typename RowExpr>
    Scalar predict_row(const RowExpr& row) const {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const TreeNode& nd = nodes[static_cast<std::size_t>(i)];
            i = row[nd.feature] < nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }
};

class GbtModel {
public:
    GbtModel() = default;
    GbtModel(std::vector<RegressionTree> trees, Scalar base_score, Scalar learning_rate,
             int best_iteration, Index n_features);

    /// Raw additive score (log-odds scale). n_trees < 0 uses best_iteration
    /// when early stopping ran, all trees otherwise.
    Vector predict_raw(const Matrix& X, int n_trees = -1) const;
    Vector predict_proba(const Matrix& X, int n_trees = -1) const;

    const std::vector<RegressionTree>& trees() const { return trees_; }
    Scalar base_score() const { return base_score_; }
    Scalar learning_rate() const { return learning_rate_; }
    int best_iteration() const { return best_iteration_; }
    Index n_features() const { return n_features_; }
    bool early_stopped() const { return early_stopped_; }

    /// Mean logistic loss on the training data after each boosting round.
    const std::vector<Scalar>& train_loss() const { return train_loss_; }
    const std::vector<Scalar>& validation_loss() const { return validation_loss_; }

private:
    friend GbtModel fit_gbt(const Matrix&, const std::vector<Label>&, const GbtParams&,
                            const Matrix*, const std::vector<Label>*, std::uint64_t);
    std::vector<RegressionTree> trees_;
    Scalar base_score_ = 0;
    Scalar learning_rate_ = 0.1;
    int best_iteration_ = 0;  // trees in the best prefix; 0 means base score only
    Index n_features_ = 0;
    bool early_stopped_ = false;
    std::vector<Scalar> train_loss_;
    std::vector<Scalar> validation_loss_;
};

/// Boosts trees greedily on the negative gradients of the logistic loss.
/// With a validation set, training stops once validation loss has not
/// improved for early_stopping_rounds rounds and best_iteration marks the
/// best prefix. Deterministic for a fixed seed.
GbtModel fit_gbt(const Matrix& X, const std::vector<Label>& y, const GbtParams& params,
                 const Matrix* X_valid = nullptr, const std::vector<Label>* y_valid = nullptr,
                 std::uint64_t seed = 0);

/// Fits a scorer the way the experiment harness does: a stratified 20%
/// slice of the data is carved out as the early-stopping validation set.
/// Falls back to a plain fit when a class is too small to split.
GbtModel train_scorer(const Matrix& X, const std::vector<Label>& y, const GbtParams& params,
                      std::uint64_t seed);

/// Mean logistic loss of raw scores against 0/1 targets.
Scalar logistic_loss(const Vector& raw_scores, const Vector& targets);

}  // namespace rinfer
