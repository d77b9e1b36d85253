// Isolation-forest filtering of rejects: drop the cases least and most
// similar to the accepted population before any labeling happens.
#pragma once

#include "rinfer/dataset.hpp"
#include "rinfer/types.hpp"

#include <cstdint>
#include <vector>

namespace rinfer {

struct IsolationForestParams {
    int n_trees = 100;
    int subsample_size = 256;  // capped at the training row count
};

struct FilterConfig {
    Scalar beta_bottom = 2;  // percent of rejects dropped from the low-similarity tail
    Scalar beta_top = 2;     // percent dropped from the high-similarity tail
    IsolationForestParams forest;

    void validate() const;
};

struct FilterResult {
    CreditDataset retained;
    std::vector<CaseId> removed_ids;
    Vector similarity;  // per input reject, in input order
};

/// Trains the forest on all accepts, scores the rejects, and removes the
/// bottom beta_bottom percent and top beta_top percent of the similarity
/// distribution (nearest-rank bands; ties on a boundary value all removed).
FilterResult filter_rejects(const CreditDataset& accepts, const CreditDataset& rejects,
                            const FilterConfig& config, std::uint64_t seed);

}  // namespace rinfer
