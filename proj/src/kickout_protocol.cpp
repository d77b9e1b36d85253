#include "rinfer/kickout_protocol.hpp"

#include "rinfer/metrics.hpp"
#include "rinfer/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace rinfer {

namespace {

/// Shuffles rows and splits off the first floor(fraction*n); stratified by
/// label when the dataset is labeled, so both classes reach the train side.
std::pair<std::vector<Index>, std::vector<Index>> split_rows(const CreditDataset& ds,
                                                             Scalar fraction,
                                                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Index> train, holdout;
    const auto split_group = [&](std::vector<Index>& rows) {
        rng.shuffle(rows);
        const std::size_t k = static_cast<std::size_t>(
            std::floor(fraction * static_cast<Scalar>(rows.size())));
        train.insert(train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k));
        holdout.insert(holdout.end(), rows.begin() + static_cast<std::ptrdiff_t>(k), rows.end());
    };
    if (ds.has_labels()) {
        std::vector<Index> goods, bads;
        for (Index i = 0; i < ds.rows(); ++i) {
            (ds.labels()[static_cast<std::size_t>(i)] == Label::Bad ? bads : goods).push_back(i);
        }
        split_group(goods);
        split_group(bads);
    } else {
        std::vector<Index> rows(static_cast<std::size_t>(ds.rows()));
        std::iota(rows.begin(), rows.end(), Index{0});
        split_group(rows);
    }
    std::sort(train.begin(), train.end());
    std::sort(holdout.begin(), holdout.end());
    return {std::move(train), std::move(holdout)};
}

/// Row indices of the floor(mu*n) lowest scores, ties broken by position.
std::vector<Index> accept_pool(const Vector& pd, Scalar mu) {
    const Index n = pd.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&pd](Index a, Index b) {
        if (pd[a] != pd[b]) return pd[a] < pd[b];
        return a < b;
    });
    const Index k = static_cast<Index>(std::floor(mu * static_cast<Scalar>(n)));
    order.resize(static_cast<std::size_t>(k));
    return order;
}

}  // namespace

void KickoutProtocolConfig::validate() const {
    if (!(mu > 0 && mu < 1)) throw std::invalid_argument("mu must lie in (0,1)");
    if (!(accept_split > 0 && accept_split < 1)) {
        throw std::invalid_argument("accept_split must lie in (0,1)");
    }
    if (!(reject_split > 0 && reject_split < 1)) {
        throw std::invalid_argument("reject_split must lie in (0,1)");
    }
    scorer.validate();
}

std::optional<Scalar> kickout_protocol(const PartitionedData& partition,
                                       const StrategySpec& strategy,
                                       const KickoutProtocolConfig& cfg) {
    cfg.validate();
    if (!partition.accepts.has_labels()) {
        throw std::invalid_argument("kickout protocol needs labeled accepts");
    }

    const auto [a_train_rows, a_holdout_rows] =
        split_rows(partition.accepts, cfg.accept_split, derive_seed(cfg.seed, "accept-split"));
    const auto [r_train_rows, r_holdout_rows] =
        split_rows(partition.rejects, cfg.reject_split, derive_seed(cfg.seed, "reject-split"));
    if (a_train_rows.empty() || a_holdout_rows.empty()) {
        throw std::runtime_error("accept split left an empty side");
    }

    const CreditDataset a_train = partition.accepts.subset(a_train_rows);
    const CreditDataset a_holdout = partition.accepts.subset(a_holdout_rows);
    const CreditDataset r_train = partition.rejects.subset(r_train_rows);
    const CreditDataset r_holdout = partition.rejects.subset(r_holdout_rows);

    // C1 and C2 share the scorer seed: with identical training data they are
    // identical models, which pins the no-reject case at exactly zero.
    const std::uint64_t scorer_seed = derive_seed(cfg.seed, "scorer");
    const GbtModel c1 =
        train_scorer(a_train.features(), a_train.labels(), cfg.scorer, scorer_seed);

    const Vector pd1 = c1.predict_proba(a_holdout.features());
    const std::vector<Index> a1 = accept_pool(pd1, cfg.mu);
    if (a1.empty()) throw std::runtime_error("mu accepts nobody from the holdout");

    Index selected_bad = 0;
    for (const Index row : a1) {
        if (a_holdout.labels()[static_cast<std::size_t>(row)] == Label::Bad) ++selected_bad;
    }
    if (selected_bad == 0 || selected_bad == static_cast<Index>(a1.size())) {
        return std::nullopt;  // p(B) degenerate, Eq. undefined
    }
    const Scalar bad_share =
        static_cast<Scalar>(selected_bad) / static_cast<Scalar>(a1.size());

    const AugmentedTrainingSet augmented =
        run_strategy(strategy, a_train, r_train, cfg.scorer, derive_seed(cfg.seed, "strategy"));
    const GbtModel c2 = train_scorer(augmented.dataset.features(), augmented.dataset.labels(),
                                     cfg.scorer, scorer_seed);

    const CreditDataset joint = r_holdout.rows() == 0
                                    ? a_holdout
                                    : CreditDataset::concat(a_holdout.without_labels(),
                                                            r_holdout);
    const Vector pd2 = c2.predict_proba(joint.features());
    const std::vector<Index> a2 = accept_pool(pd2, cfg.mu);
    std::unordered_set<CaseId> a2_ids;
    for (const Index row : a2) a2_ids.insert(joint.ids()[static_cast<std::size_t>(row)]);

    KickoutInputs in;
    in.selected_bad = selected_bad;
    in.bad_share = bad_share;
    for (const Index row : a1) {
        if (a2_ids.count(a_holdout.ids()[static_cast<std::size_t>(row)])) continue;
        if (a_holdout.labels()[static_cast<std::size_t>(row)] == Label::Bad) {
            ++in.kicked_bad;
        } else {
            ++in.kicked_good;
        }
    }
    return kickout(in);
}

}  // namespace rinfer
