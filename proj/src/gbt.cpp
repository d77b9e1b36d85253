#include "rinfer/gbt.hpp"

#include "rinfer/dataset.hpp"
#include "rinfer/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rinfer {

void GbtParams::validate() const {
    if (max_trees < 1) throw std::invalid_argument("gbt: max_trees must be >= 1");
    if (learning_rate <= 0.0 || learning_rate > 1.0)
        throw std::invalid_argument("gbt: learning_rate must lie in (0,1]");
    if (max_depth < 1) throw std::invalid_argument("gbt: max_depth must be >= 1");
    if (min_child_weight < 0) throw std::invalid_argument("gbt: min_child_weight must be >= 0");
    if (subsample <= 0.0 || subsample > 1.0)
        throw std::invalid_argument("gbt: subsample must lie in (0,1]");
    if (reg_lambda < 0) throw std::invalid_argument("gbt: reg_lambda must be >= 0");
}

GbtModel::GbtModel(std::vector<RegressionTree> trees, Scalar base_score, Scalar learning_rate,
                   int best_iteration, Index n_features)
    : trees_(std::move(trees)),
      base_score_(base_score),
      learning_rate_(learning_rate),
      best_iteration_(best_iteration),
      n_features_(n_features) {
    if (best_iteration_ < 0 || best_iteration_ > static_cast<int>(trees_.size()))
        throw std::invalid_argument("gbt: best_iteration out of range");
}

Vector GbtModel::predict_raw(const Matrix& X, int n_trees) const {
    if (X.cols() != n_features_) throw std::invalid_argument("gbt: feature count mismatch");
    int use = n_trees;
    if (use < 0) use = early_stopped_ ? best_iteration_ : static_cast<int>(trees_.size());
    use = std::min<int>(use, static_cast<int>(trees_.size()));
    Vector out = Vector::Constant(X.rows(), base_score_);
    for (Index i = 0; i < X.rows(); ++i) {
        const auto row = X.row(i);
        Scalar s = 0;
        for (int t = 0; t < use; ++t) s += trees_[static_cast<std::size_t>(t)].predict_row(row);
        out[i] += s;
    }
    return out;
}

Vector GbtModel::predict_proba(const Matrix& X, int n_trees) const {
    Vector raw = predict_raw(X, n_trees);
    for (Index i = 0; i < raw.size(); ++i) raw[i] = sigmoid(raw[i]);
    return raw;
}

Scalar logistic_loss(const Vector& raw_scores, const Vector& targets) {
    Scalar loss = 0;
    for (Index i = 0; i < raw_scores.size(); ++i) {
        const Scalar z = raw_scores[i];
        const Scalar softplus = z > 35.0 ? z : (z < -35.0 ? std::exp(z) : std::log1p(std::exp(z)));
        loss += softplus - targets[i] * z;
    }
    return loss / static_cast<Scalar>(raw_scores.size());
}

namespace {

constexpr Scalar kMinSplitGain = 1e-12;
constexpr Scalar kMaxLeafValue = 10.0;

struct BuildNode {
    Scalar sum_g = 0, sum_h = 0;
    Index count = 0;
    // best split found so far
    Scalar best_gain = 0;
    int best_feature = -1;
    Scalar best_threshold = 0;
    int tree_index = -1;  // index into RegressionTree::nodes
};

struct ScanState {
    Scalar g = 0, h = 0;
    Index count = 0;
    Scalar last_value = 0;
    bool seen = false;
};

// One boosting round: grows a depth-capped tree on (g, h) over the rows in
// `rows`, exact greedy scan in presorted feature order.
RegressionTree build_tree(const Matrix& X, const Vector& g, const Vector& h,
                          const std::vector<std::vector<int>>& sorted_rows,
                          const std::vector<int>& rows, const GbtParams& params) {
    const Index d = X.cols();
    RegressionTree tree;

    std::vector<int> node_of_row(static_cast<std::size_t>(X.rows()), -1);
    for (int r : rows) node_of_row[static_cast<std::size_t>(r)] = 0;

    std::vector<BuildNode> level(1);
    for (int r : rows) {
        level[0].sum_g += g[r];
        level[0].sum_h += h[r];
        ++level[0].count;
    }
    tree.nodes.emplace_back();
    level[0].tree_index = 0;

    const Scalar lam = params.reg_lambda;
    auto leaf_value = [&](const BuildNode& nd) {
        Scalar v = -nd.sum_g / (nd.sum_h + lam);
        v = std::clamp(v, -kMaxLeafValue, kMaxLeafValue);
        return params.learning_rate * v;
    };
    auto score = [&](Scalar gs, Scalar hs) { return gs * gs / (hs + lam); };

    int level_base = 0;  // node id offset of the current level
    for (int depth = 0; depth < params.max_depth && !level.empty(); ++depth) {
        // exact greedy scan, one pass per feature over the presorted order
        std::vector<ScanState> scan(level.size());
        for (Index j = 0; j < d; ++j) {
            for (auto& s : scan) s = ScanState{};
            for (int r : sorted_rows[static_cast<std::size_t>(j)]) {
                const int nid = node_of_row[static_cast<std::size_t>(r)];
                if (nid < level_base) continue;
                auto& s = scan[static_cast<std::size_t>(nid - level_base)];
                auto& nd = level[static_cast<std::size_t>(nid - level_base)];
                const Scalar v = X(r, j);
                if (s.seen && v > s.last_value && s.count > 0 &&
                    static_cast<Index>(s.count) < nd.count) {
                    const Scalar hl = s.h, hr = nd.sum_h - s.h;
                    if (hl >= params.min_child_weight && hr >= params.min_child_weight) {
                        const Scalar gain = 0.5 * (score(s.g, hl) + score(nd.sum_g - s.g, hr) -
                                                   score(nd.sum_g, nd.sum_h));
                        // strict improvement keeps the lowest feature index
                        // and lowest threshold on ties
                        if (gain > kMinSplitGain && (nd.best_feature < 0 || gain > nd.best_gain)) {
                            nd.best_gain = gain;
                            nd.best_feature = static_cast<int>(j);
                            nd.best_threshold = 0.5 * (s.last_value + v);
                        }
                    }
                }
                s.g += g[r];
                s.h += h[r];
                ++s.count;
                s.last_value = v;
                s.seen = true;
            }
        }

        // realize splits; unsplittable nodes become leaves
        std::vector<BuildNode> next;
        const int next_base = level_base + static_cast<int>(level.size());
        for (auto& nd : level) {
            auto& tn = tree.nodes[static_cast<std::size_t>(nd.tree_index)];
            if (nd.best_feature < 0) {
                tn.value = leaf_value(nd);
                continue;
            }
            tn.feature = nd.best_feature;
            tn.threshold = nd.best_threshold;
            tn.left = static_cast<int>(tree.nodes.size());
            tn.right = tn.left + 1;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            BuildNode l, r;
            l.tree_index = tn.left;
            r.tree_index = tn.right;
            next.push_back(l);
            next.push_back(r);
        }
        if (next.empty()) break;

        // route rows to children and accumulate child stats
        std::vector<int> child_slot(level.size() * 2, -1);
        {
            int slot = 0;
            for (std::size_t i = 0; i < level.size(); ++i) {
                if (tree.nodes[static_cast<std::size_t>(level[i].tree_index)].feature >= 0) {
                    child_slot[2 * i] = slot++;
                    child_slot[2 * i + 1] = slot++;
                }
            }
        }
        for (int r : rows) {
            const int nid = node_of_row[static_cast<std::size_t>(r)];
            if (nid < level_base) continue;
            const std::size_t li = static_cast<std::size_t>(nid - level_base);
            const auto& tn = tree.nodes[static_cast<std::size_t>(level[li].tree_index)];
            if (tn.feature < 0) {
                node_of_row[static_cast<std::size_t>(r)] = -1;  // finished leaf
                continue;
            }
            const bool go_left = X(r, tn.feature) < tn.threshold;
            const int slot = child_slot[2 * li + (go_left ? 0 : 1)];
            auto& child = next[static_cast<std::size_t>(slot)];
            child.sum_g += g[r];
            child.sum_h += h[r];
            ++child.count;
            node_of_row[static_cast<std::size_t>(r)] = next_base + slot;
        }
        level_base = next_base;
        level = std::move(next);

        if (depth + 1 == params.max_depth) {
            for (auto& nd : level)
                tree.nodes[static_cast<std::size_t>(nd.tree_index)].value = leaf_value(nd);
            level.clear();
        }
    }
    return tree;
}

}  // namespace

GbtModel fit_gbt(const Matrix& X, const std::vector<Label>& y, const GbtParams& params,
                 const Matrix* X_valid, const std::vector<Label>* y_valid, std::uint64_t seed) {
    params.validate();
    const Index n = X.rows();
    const Index d = X.cols();
    if (static_cast<Index>(y.size()) != n)
        throw std::invalid_argument("gbt: label count mismatch");
    if (!X.allFinite()) throw std::invalid_argument("gbt: non-finite features");

    const Vector targets = to_targets(y);
    const Scalar bad = targets.sum();
    if (bad == 0.0 || bad == static_cast<Scalar>(n))
        throw std::invalid_argument("gbt: single-class input");

    const bool use_early_stopping = params.early_stopping_rounds > 0 && X_valid != nullptr;
    if (X_valid != nullptr) {
        if (y_valid == nullptr || X_valid->rows() == 0)
            throw std::invalid_argument("gbt: empty validation set with early stopping requested");
        if (static_cast<Index>(y_valid->size()) != X_valid->rows())
            throw std::invalid_argument("gbt: validation label count mismatch");
        if (X_valid->cols() != d)
            throw std::invalid_argument("gbt: validation feature count mismatch");
    }

    // global presort, reused by every round
    std::vector<std::vector<int>> sorted_rows(static_cast<std::size_t>(d));
    for (Index j = 0; j < d; ++j) {
        auto& ord = sorted_rows[static_cast<std::size_t>(j)];
        ord.resize(static_cast<std::size_t>(n));
        std::iota(ord.begin(), ord.end(), 0);
        std::stable_sort(ord.begin(), ord.end(),
                         [&X, j](int a, int b) { return X(a, j) < X(b, j); });
    }

    const Scalar base_rate = bad / static_cast<Scalar>(n);
    const Scalar base_score = std::log(base_rate / (1.0 - base_rate));

    GbtModel model;
    model.base_score_ = base_score;
    model.learning_rate_ = params.learning_rate;
    model.n_features_ = d;

    Vector raw = Vector::Constant(n, base_score);
    Vector raw_valid;
    Vector targets_valid;
    if (X_valid != nullptr) {
        raw_valid = Vector::Constant(X_valid->rows(), base_score);
        targets_valid = to_targets(*y_valid);
    }

    Vector g(n), h(n);
    std::vector<int> all_rows(static_cast<std::size_t>(n));
    std::iota(all_rows.begin(), all_rows.end(), 0);

    Scalar best_valid_loss = std::numeric_limits<Scalar>::infinity();
    if (use_early_stopping) {
        best_valid_loss = logistic_loss(raw_valid, targets_valid);
        model.best_iteration_ = 0;
    }

    for (int round = 0; round < params.max_trees; ++round) {
        for (Index i = 0; i < n; ++i) {
            const Scalar p = sigmoid(raw[i]);
            g[i] = p - targets[i];
            h[i] = std::max(p * (1.0 - p), 1e-16);
        }

        std::vector<int> rows;
        if (params.subsample < 1.0) {
            Rng rng(derive_seed(seed, "gbt-subsample", static_cast<std::uint64_t>(round)));
            rows.reserve(static_cast<std::size_t>(n));
            for (int r = 0; r < static_cast<int>(n); ++r)
                if (rng.uniform() < params.subsample) rows.push_back(r);
            if (rows.empty()) rows = all_rows;
        } else {
            rows = all_rows;
        }

        RegressionTree tree = build_tree(X, g, h, sorted_rows, rows, params);
        for (Index i = 0; i < n; ++i) raw[i] += tree.predict_row(X.row(i));
        if (X_valid != nullptr)
            for (Index i = 0; i < X_valid->rows(); ++i)
                raw_valid[i] += tree.predict_row(X_valid->row(i));
        model.trees_.push_back(std::move(tree));

        model.train_loss_.push_back(logistic_loss(raw, targets));
        if (X_valid != nullptr) {
            const Scalar vl = logistic_loss(raw_valid, targets_valid);
            model.validation_loss_.push_back(vl);
            if (use_early_stopping) {
                if (vl < best_valid_loss) {
                    best_valid_loss = vl;
                    model.best_iteration_ = round + 1;
                }
                if (round + 1 - model.best_iteration_ >= params.early_stopping_rounds) {
                    model.early_stopped_ = true;
                    break;
                }
            }
        }
    }
    if (!use_early_stopping) model.best_iteration_ = static_cast<int>(model.trees_.size());
    return model;
}

GbtModel train_scorer(const Matrix& X, const std::vector<Label>& y, const GbtParams& params,
                      std::uint64_t seed) {
    constexpr int kFolds = 5;  // fold 0 becomes the 20% validation slice
    Index n_bad = 0;
    for (Label l : y) n_bad += l == Label::Bad;
    const Index n_good = static_cast<Index>(y.size()) - n_bad;

    if (params.early_stopping_rounds <= 0 || n_bad < kFolds || n_good < kFolds)
        return fit_gbt(X, y, params, nullptr, nullptr, seed);

    std::vector<CaseId> ids(y.size());
    std::iota(ids.begin(), ids.end(), CaseId{0});
    const CreditDataset ds(std::move(ids), X, y);
    const FoldAssignment folds = stratified_kfold(ds, kFolds, derive_seed(seed, "scorer-valid"));
    const CreditDataset train = ds.subset(folds.complement_rows(0));
    const CreditDataset valid = ds.subset(folds.fold_rows(0));
    return fit_gbt(train.features(), train.labels(), params, &valid.features(), &valid.labels(),
                   seed);
}

}  // namespace rinfer
