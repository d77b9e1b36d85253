// Isolation forest novelty scoring: path length to isolate an observation,
// short paths meaning anomalous.
#pragma once

#include "rinfer/types.hpp"

#include <cstdint>
#include <vector>

namespace rinfer {

struct IsolationNode {
    int feature = -1;  // -1 marks an external node
    Scalar threshold = 0;
    int left = -1;
    int right = -1;
    int size = 0;      // rows that reached this external node while training
};

struct IsolationTree {
    std::vector<IsolationNode> nodes;  // nodes[0] is the root
};

class IsolationForestModel {
public:
    IsolationForestModel() = default;
    IsolationForestModel(std::vector<IsolationTree> trees, int subsample_size, Index n_features);

    /// Average path length over the trees.
    Vector average_path_length(const Matrix& X) const;

    /// Standard anomaly score s(x) = 2^(-E[h(x)] / c(subsample_size)).
    Vector anomaly_score(const Matrix& X) const;

    /// 1 - anomaly score: higher = more similar to the training data.
    Vector similarity_score(const Matrix& X) const;

    const std::vector<IsolationTree>& trees() const { return trees_; }
    int subsample_size() const { return subsample_size_; }
    Index n_features() const { return n_features_; }

private:
    std::vector<IsolationTree> trees_;
    int subsample_size_ = 0;
    Index n_features_ = 0;
};

/// Each tree is grown on a random subsample (without replacement) with
/// uniform-random split feature and threshold, until isolation or the
/// ceil(log2(subsample_size)) depth cap.
IsolationForestModel fit_isolation_forest(const Matrix& X, int n_trees, int subsample_size,
                                          std::uint64_t seed);

/// Expected path length of an unsuccessful BST search among n points:
/// c(1) = 0, c(2) = 1, c(n) = 2 H(n-1) - 2 (n-1)/n.
Scalar expected_path_length(Scalar n);

}  // namespace rinfer
