// Reject-inference strategies. Every strategy consumes a labeled accept pool
// and an unlabeled reject pool and returns an augmented labeled training set
// for the downstream scorer.
#pragma once

#include "rinfer/dataset.hpp"
#include "rinfer/filtering.hpp"
#include "rinfer/gbt.hpp"
#include "rinfer/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rinfer {

enum class Provenance : std::uint8_t { OriginalAccept, InferredGood, InferredBad };

/// One row of the optional per-iteration audit trace.
struct IterationTrace {
    int iteration = 0;
    std::size_t pool_size = 0;      // labeled pool entering the iteration
    Scalar threshold_good = 0;      // selection cutoffs used this iteration
    Scalar threshold_bad = 0;
    std::size_t appended_good = 0;
    std::size_t appended_bad = 0;
};

struct AugmentedTrainingSet {
    CreditDataset dataset;
    std::vector<Provenance> provenance;  // one entry per dataset row
    int iterations_used = 0;
    std::vector<IterationTrace> trace;   // filled by the iterative strategies
    std::string warning;  // non-empty when the strategy degraded to a no-op
};

struct ShallowConfig {
    // theta defaults near the bad:good odds a weak legacy scorecard leaves
    // in the reject pool; a single labeling pass avoids compounding early
    // pseudo-label mistakes.
    Scalar alpha = 0.02;           // good-tail selection fraction
    Scalar theta = 5.0;            // bad-tail imbalance multiplier
    std::optional<Scalar> lambda;  // labeler penalty; tuned internally when unset
    int max_iterations = 1;
    FilterConfig filter;

    void validate() const;
};

enum class StrategyKind {
    IgnoreRejects,
    LabelAllBad,
    HardCutoff,
    Parcelling,
    CvVoting,
    RegularSelfLearning,
    ShallowSelfLearning,
};

std::string strategy_kind_name(StrategyKind kind);
StrategyKind strategy_kind_from_string(const std::string& name);

/// A strategy plus its meta-parameters, as named in config files.
/// Parameter keys per kind:
///   ignore_rejects        (none)
///   label_all_bad         (none)
///   hard_cutoff           threshold
///   parcelling            n_batches, multiplier
///   cv_voting             n_folds, threshold
///   self_learning         percentage, max_iterations
///   shallow_self_learning alpha, theta, max_iterations, filter_beta_bottom,
///                         filter_beta_top, lambda (optional; tuned when absent)
struct StrategySpec {
    StrategyKind kind = StrategyKind::IgnoreRejects;
    std::map<std::string, Scalar> params;

    /// Stable identifier: kind name plus sorted parameters,
    /// e.g. "hard_cutoff[threshold=0.4]".
    std::string id() const;
    void validate() const;
};

AugmentedTrainingSet ignore_rejects(const CreditDataset& accepts, const CreditDataset& rejects);

AugmentedTrainingSet label_all_bad(const CreditDataset& accepts, const CreditDataset& rejects);

AugmentedTrainingSet hard_cutoff(const CreditDataset& accepts, const CreditDataset& rejects,
                                 Scalar threshold, const GbtParams& scorer, std::uint64_t seed);

AugmentedTrainingSet parcelling(const CreditDataset& accepts, const CreditDataset& rejects,
                                int n_batches, Scalar multiplier, const GbtParams& scorer,
                                std::uint64_t seed);

AugmentedTrainingSet cv_voting(const CreditDataset& accepts, const CreditDataset& rejects,
                               int n_folds, Scalar threshold, const GbtParams& scorer,
                               std::uint64_t seed);

AugmentedTrainingSet regular_self_learning(const CreditDataset& accepts,
                                           const CreditDataset& rejects, Scalar percentage,
                                           int max_iterations, const GbtParams& scorer,
                                           std::uint64_t seed);

AugmentedTrainingSet shallow_self_learning(const CreditDataset& accepts,
                                           const CreditDataset& rejects, const ShallowConfig& cfg,
                                           std::uint64_t seed);

/// Dispatches on spec.kind after validating the parameter map.
AugmentedTrainingSet run_strategy(const StrategySpec& spec, const CreditDataset& accepts,
                                  const CreditDataset& rejects, const GbtParams& scorer,
                                  std::uint64_t seed);

}  // namespace rinfer
