// Evaluation measures and statistical comparison tests.
#pragma once

#include "rinfer/types.hpp"

#include <vector>

namespace rinfer {

/// Probability that a random Bad case outranks a random Good case by
/// predicted PD, ties counted one half. Rank-based, O(n log n).
Scalar auc(const std::vector<Label>& labels, const Vector& scores);

/// Mean squared difference between predicted probability and the 0/1
/// outcome (Bad = 1). Lower is better calibrated.
Scalar brier(const std::vector<Label>& labels, const Vector& probabilities);

/// Share of Good cases among the floor(accept_fraction * n) lowest-PD
/// cases. Ties at the cutoff are broken by stable input order.
Scalar r_precision(const std::vector<Label>& labels, const Vector& scores,
                   Scalar accept_fraction = 0.3);

/// Composition change of the accepted pool after reject inference.
struct KickoutInputs {
    Index kicked_bad = 0;    // bad cases that left the originally accepted pool
    Index kicked_good = 0;   // good cases that left it
    Index selected_bad = 0;  // bad cases in the originally accepted pool
    Scalar bad_share = 0;    // share of bad cases in that pool, in (0,1)

    void validate() const;
};

/// In [-1, 1]; positive values mean the technique kicked out proportionally
/// more bad than good cases.
Scalar kickout(const KickoutInputs& in);

struct FriedmanResult {
    Scalar statistic = 0;  // chi-square with k-1 degrees of freedom
    Scalar p_value = 1;
    Vector mean_ranks;     // per treatment, average over blocks
    Index treatments = 0;
    Index blocks = 0;
};

/// Friedman rank-sum test. Rows are blocks, columns are treatments; ranks
/// within a block use average ranks on ties.
FriedmanResult friedman_test(const Matrix& values);

/// Nemenyi critical difference at significance alpha (only 0.05 is tabled,
/// k in [2, 10]). Two treatments differ when their mean-rank gap exceeds it.
Scalar nemenyi_critical_difference(int k, int n_blocks, Scalar alpha = 0.05);

/// Spearman rank correlation: Pearson correlation of average ranks.
Scalar spearman(const Vector& a, const Vector& b);

/// Average ranks (1-based) of the values, ties averaged.
Vector average_ranks(const Vector& values);

/// Regularized upper incomplete gamma Q(a, x); chi-square survival is
/// Q(dof/2, x/2).
Scalar gamma_q(Scalar a, Scalar x);

Scalar chi_squared_sf(Scalar x, int dof);

}  // namespace rinfer
