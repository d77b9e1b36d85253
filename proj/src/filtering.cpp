#include "rinfer/filtering.hpp"

#include "rinfer/isolation_forest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rinfer {

void FilterConfig::validate() const {
    if (!(beta_bottom >= 0) || !(beta_top >= 0)) {
        throw std::invalid_argument("filter percentiles must be non-negative");
    }
    if (beta_bottom + beta_top >= 100) {
        throw std::invalid_argument("filter percentiles must leave part of the distribution");
    }
    if (forest.n_trees < 1) throw std::invalid_argument("filter forest needs at least one tree");
    if (forest.subsample_size < 2) {
        throw std::invalid_argument("filter forest subsample must be at least 2");
    }
}

FilterResult filter_rejects(const CreditDataset& accepts, const CreditDataset& rejects,
                            const FilterConfig& config, std::uint64_t seed) {
    config.validate();
    if (rejects.rows() == 0) throw std::invalid_argument("no rejects to filter");

    const int subsample = static_cast<int>(
        std::min<Index>(static_cast<Index>(config.forest.subsample_size), accepts.rows()));
    const IsolationForestModel forest =
        fit_isolation_forest(accepts.features(), config.forest.n_trees, subsample, seed);

    const Index m = static_cast<Index>(rejects.rows());
    Vector similarity = forest.similarity_score(rejects.features());

    const auto band = [m](Scalar percent) {
        return static_cast<Index>(std::floor(static_cast<Scalar>(m) * percent / 100.0));
    };
    const Index k_bottom = band(config.beta_bottom);
    const Index k_top = band(config.beta_top);

    std::vector<Scalar> sorted(similarity.data(), similarity.data() + m);
    std::sort(sorted.begin(), sorted.end());

    std::vector<char> drop(static_cast<std::size_t>(m), 0);
    if (k_bottom > 0) {
        const Scalar cutoff = sorted[static_cast<std::size_t>(k_bottom - 1)];
        for (Index i = 0; i < m; ++i) {
            if (similarity[i] <= cutoff) drop[static_cast<std::size_t>(i)] = 1;
        }
    }
    if (k_top > 0) {
        const Scalar cutoff = sorted[static_cast<std::size_t>(m - k_top)];
        for (Index i = 0; i < m; ++i) {
            if (similarity[i] >= cutoff) drop[static_cast<std::size_t>(i)] = 1;
        }
    }

    std::vector<Index> keep_rows;
    keep_rows.reserve(static_cast<std::size_t>(m));
    FilterResult result;
    for (Index i = 0; i < m; ++i) {
        if (drop[static_cast<std::size_t>(i)]) {
            result.removed_ids.push_back(rejects.ids()[static_cast<std::size_t>(i)]);
        } else {
            keep_rows.push_back(i);
        }
    }
    if (keep_rows.empty()) {
        throw std::runtime_error("filtering removed every reject; lower the percentile bands");
    }

    result.retained = rejects.subset(keep_rows);
    result.similarity = std::move(similarity);
    return result;
}

}  // namespace rinfer
