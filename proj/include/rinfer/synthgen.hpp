// Synthetic biased-lending data: a through-the-door population with known
// default probabilities, split into accepts / rejects / unbiased holdout by
// a deliberately weakened legacy scorecard.
#pragma once

#include "rinfer/dataset.hpp"
#include "rinfer/logistic.hpp"
#include "rinfer/types.hpp"

#include <cstdint>

namespace rinfer {

struct GeneratorConfig {
    Index n_population = 6000;
    Index n_features = 30;
    Index n_informative = 12;
    Scalar noise_scale = 0.25;       // sd of the latent-index noise term
    Index legacy_feature_subset = 8; // informative columns the legacy scorecard may see
    Scalar acceptance_rate = 0.66;
    Scalar unbiased_fraction = 0.05;
    Scalar target_accept_bad_rate = 0.39;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Population-level bad rate the intercept calibration aims for: midway
/// between the desired accept-pool rate and a through-the-door rate ~1.7x
/// higher, so that honest selection can reproduce both ends.
Scalar population_target_rate(const GeneratorConfig& cfg);

struct Population {
    CreditDataset data;  // labeled
    Vector true_pd;
    Scalar intercept = 0;  // calibrated by bisection
};

/// Correlated Gaussian-mixture features; true PD is a logistic transform of
/// a linear index over the first n_informative columns plus noise; labels
/// are Bernoulli draws from the true PD.
Population generate_population(const GeneratorConfig& cfg);

struct PartitionStats {
    std::size_t n_accepts = 0;
    std::size_t n_rejects = 0;
    std::size_t n_unbiased = 0;
    Scalar accept_bad_rate = 0;
    Scalar reject_bad_rate = 0;  // from the sealed labels, for reporting only
    Scalar unbiased_bad_rate = 0;
    Scalar unbiased_to_accept_ratio = 0;
    Scalar legacy_auc_unbiased = 0;
};

struct SimulationResult {
    PartitionedData partition;  // reject labels sealed
    PartitionStats stats;
    L1LogisticModel legacy_scorecard;
};

/// Carves off the unbiased holdout uniformly at random, trains the legacy
/// scorecard (L1 logistic restricted to the first legacy_feature_subset
/// columns) on a fresh disjoint seed sample, and accepts the lowest-PD
/// acceptance_rate share of the remainder. Reject labels leave sealed.
SimulationResult simulate_acceptance(const Population& population, const GeneratorConfig& cfg);

/// generate_population + simulate_acceptance in one step.
SimulationResult generate_partitioned(const GeneratorConfig& cfg);

}  // namespace rinfer
