#include "rinfer/isolation_forest.hpp"

#include "rinfer/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rinfer {

Scalar expected_path_length(Scalar n) {
    if (n <= 1.0) return 0.0;
    if (n == 2.0) return 1.0;
    constexpr Scalar euler_gamma = 0.57721566490153286060651209;
    const Scalar harmonic = std::log(n - 1.0) + euler_gamma;
    return 2.0 * harmonic - 2.0 * (n - 1.0) / n;
}

IsolationForestModel::IsolationForestModel(std::vector<IsolationTree> trees, int subsample_size,
                                           Index n_features)
    : trees_(std::move(trees)), subsample_size_(subsample_size), n_features_(n_features) {}

namespace {

// Grows one tree over `rows`; returns the node index.
int grow(const Matrix& X, std::vector<int>& rows, int begin, int end, int depth, int depth_cap,
         Rng& rng, IsolationTree& tree) {
    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    const int count = end - begin;
    if (count <= 1 || depth >= depth_cap) {
        tree.nodes[static_cast<std::size_t>(node_index)].size = count;
        return node_index;
    }

    // candidate features: those not constant over this node
    std::vector<int> candidates;
    for (Index j = 0; j < X.cols(); ++j) {
        Scalar lo = X(rows[static_cast<std::size_t>(begin)], j);
        Scalar hi = lo;
        for (int i = begin + 1; i < end; ++i) {
            const Scalar v = X(rows[static_cast<std::size_t>(i)], j);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi > lo) candidates.push_back(static_cast<int>(j));
    }
    if (candidates.empty()) {
        tree.nodes[static_cast<std::size_t>(node_index)].size = count;
        return node_index;
    }

    const int feature =
        candidates[rng.uniform_int(static_cast<std::uint64_t>(candidates.size()))];
    Scalar lo = X(rows[static_cast<std::size_t>(begin)], feature);
    Scalar hi = lo;
    for (int i = begin + 1; i < end; ++i) {
        const Scalar v = X(rows[static_cast<std::size_t>(i)], feature);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Scalar threshold = rng.uniform(lo, hi);
    if (threshold <= lo) threshold = std::nextafter(lo, hi);  // both children non-empty

    auto mid_it = std::partition(rows.begin() + begin, rows.begin() + end,
                                 [&](int r) { return X(r, feature) < threshold; });
    const int mid = static_cast<int>(mid_it - rows.begin());

    const int left = grow(X, rows, begin, mid, depth + 1, depth_cap, rng, tree);
    const int right = grow(X, rows, mid, end, depth + 1, depth_cap, rng, tree);
    auto& nd = tree.nodes[static_cast<std::size_t>(node_index)];
    nd.feature = feature;
    nd.threshold = threshold;
    nd.left = left;
    nd.right = right;
    return node_index;
}

Scalar path_length(const IsolationTree& tree, const auto& row) {
    int i = 0;
    Scalar depth = 0;
    while (tree.nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& nd = tree.nodes[static_cast<std::size_t>(i)];
        i = row[nd.feature] < nd.threshold ? nd.left : nd.right;
        depth += 1.0;
    }
    return depth + expected_path_length(
                       static_cast<Scalar>(tree.nodes[static_cast<std::size_t>(i)].size));
}

}  // namespace

IsolationForestModel fit_isolation_forest(const Matrix& X, int n_trees, int subsample_size,
                                          std::uint64_t seed) {
    const Index n = X.rows();
    if (n < 2) throw std::invalid_argument("isolation forest: needs at least 2 rows");
    if (n_trees < 1) throw std::invalid_argument("isolation forest: n_trees must be >= 1");
    if (subsample_size < 2 || static_cast<Index>(subsample_size) > n)
        throw std::invalid_argument("isolation forest: subsample_size must lie in [2, n]");
    if (!X.allFinite()) throw std::invalid_argument("isolation forest: non-finite features");

    const int depth_cap =
        static_cast<int>(std::ceil(std::log2(static_cast<Scalar>(subsample_size))));

    std::vector<IsolationTree> trees;
    trees.reserve(static_cast<std::size_t>(n_trees));
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);

    for (int t = 0; t < n_trees; ++t) {
        Rng rng(derive_seed(seed, "iso-tree", static_cast<std::uint64_t>(t)));
        // partial Fisher-Yates: first subsample_size entries form the sample
        for (int i = 0; i < subsample_size; ++i) {
            const auto j = i + static_cast<int>(rng.uniform_int(
                                   static_cast<std::uint64_t>(n - static_cast<Index>(i))));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        std::vector<int> rows(pool.begin(), pool.begin() + subsample_size);
        IsolationTree tree;
        grow(X, rows, 0, subsample_size, 0, depth_cap, rng, tree);
        trees.push_back(std::move(tree));
    }
    return IsolationForestModel(std::move(trees), subsample_size, X.cols());
}

Vector IsolationForestModel::average_path_length(const Matrix& X) const {
    if (X.cols() != n_features_)
        throw std::invalid_argument("isolation forest: feature count mismatch");
    Vector out = Vector::Zero(X.rows());
    for (Index i = 0; i < X.rows(); ++i) {
        const auto row = X.row(i);
        Scalar sum = 0;
        for (const auto& tree : trees_) sum += path_length(tree, row);
        out[i] = sum / static_cast<Scalar>(trees_.size());
    }
    return out;
}

Vector IsolationForestModel::anomaly_score(const Matrix& X) const {
    Vector h = average_path_length(X);
    const Scalar c = expected_path_length(static_cast<Scalar>(subsample_size_));
    for (Index i = 0; i < h.size(); ++i) h[i] = std::exp2(-h[i] / c);
    return h;
}

Vector IsolationForestModel::similarity_score(const Matrix& X) const {
    return Vector::Ones(X.rows()) - anomaly_score(X);
}

}  // namespace rinfer
